//! Weighted energies, decay fits, Hardy and elliptic witnesses, and the
//! Eulerian picture of a Lagrangian state.

mod energy;
mod eulerian;
mod fit;
mod hardy;

use thiserror::Error;

pub use energy::{
    elliptic_ratio, energy_j, energy_ji, energy_report, energy_report_with, time_derivatives,
    EllipticRatio, EnergyConfig, EnergyReport,
};
pub use eulerian::{
    eulerian_reconstruct, pointwise_decay_check, reconstructed_mass, vacuum_slope, EulerianFields,
    PointwiseDecay,
};
pub use fit::{fit_decay_rate, DecayFit};
pub use hardy::{hardy_check, hardy_grid, hardy_refinement, HardyWitness};

use crate::solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("energy order (j = {j}, i = {i}) beyond the configured cap")]
    OrderUnavailable { j: usize, i: usize },
    #[error("need at least {needed} samples in the fit window, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("nonpositive value {value} at t = {time} in a log fit")]
    NonpositiveEnergy { time: f64, value: f64 },
    #[error("invalid fit window [{lo}, {hi}]")]
    InvalidWindow { lo: f64, hi: f64 },
    #[error("Jacobian degenerate at node {node}: {value}")]
    JacobianDegenerate { node: usize, value: f64 },
    #[error("Hardy hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Solver(Box<SolverError>),
}

impl From<SolverError> for DiagnosticsError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::JacobianDegenerate { node, value, .. } => {
                DiagnosticsError::JacobianDegenerate { node, value }
            }
            other => DiagnosticsError::Solver(Box::new(other)),
        }
    }
}

pub type Result<T> = std::result::Result<T, DiagnosticsError>;

#[cfg(test)]
mod tests;
