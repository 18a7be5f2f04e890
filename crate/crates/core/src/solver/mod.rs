//! Lagrangian evolution of the perturbation `ζ` with `η = y(1 + ζ)`.
//!
//! Dividing the momentum balance by ρ̄ gives, with `s = 1 + ζ + yζ_y`,
//!
//! ```text
//! y ζ_tt + y ζ_t + A σ (1+ζ)² [(1+ζ)^{-2γ} s^{-γ}]_y
//!     + A γ/(γ-1) σ_y [(1+ζ)^{2-2γ} s^{-γ} - (1+ζ)^{-2}] = 0,
//! ```
//!
//! which stays regular at the vacuum end because `σ(R) = 0` while `σ_y`
//! is finite there. The core node is pinned, `ζ(r₀) = ζ_t(r₀) = 0`.

mod grid;
mod integrator;
mod model;

use thiserror::Error;

pub use grid::{cubic_cell_weights, fornberg, Grid, Stencils, STENCIL_WIDTH};
pub use integrator::{evolve, lawson_rk4, stable_dt, step, Trajectory};
pub use model::{
    acceleration, apply_perturbation, build_grid, spatial_operator, Model, Perturbation,
    PerturbationKind, SimState, SolverOptions, DEFAULT_CORE_ORDER, MAX_AMPLITUDE,
};

use crate::diagnostics::DiagnosticsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("mesh grading power must be >= 1, got {0}")]
    InvalidGrading(f64),
    #[error("need at least 8 cells, got {0}")]
    TooFewCells(usize),
    #[error("Jacobian degenerate at node {node} (y = {y}): {value} <= floor {floor}")]
    JacobianDegenerate {
        node: usize,
        y: f64,
        value: f64,
        floor: f64,
    },
    #[error("perturbation amplitude {0} exceeds the cap {MAX_AMPLITUDE}")]
    AmplitudeTooLarge(f64),
    #[error("perturbation mode {mode} and core order {core_order} must both be >= 1")]
    InvalidPerturbation { mode: u32, core_order: u32 },
    #[error("time step {dt} exceeds the stability bound {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("end time {t_end} must exceed the current time {time}")]
    InvalidTime { time: f64, t_end: f64 },
    #[error("at t = {time}: {source}")]
    AtTime {
        time: f64,
        #[source]
        source: Box<SolverError>,
    },
    #[error("diagnostics failed: {0}")]
    Diagnostics(Box<DiagnosticsError>),
}

impl From<DiagnosticsError> for SolverError {
    fn from(e: DiagnosticsError) -> Self {
        SolverError::Diagnostics(Box::new(e))
    }
}

pub type Result<T> = std::result::Result<T, SolverError>;
