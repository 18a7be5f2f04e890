//! Damped, spherically symmetric Euler flow around a rigid core with a
//! physical-vacuum free boundary.
//!
//! The crate is split along the lines of the experiment pipeline:
//!
//! * [`equilibrium`] builds the closed-form background state and the
//!   self-gravitating variant,
//! * [`solver`] evolves Lagrangian perturbations on a boundary-graded mesh,
//! * [`diagnostics`] evaluates the weighted energies, decay fits and the
//!   Eulerian reconstruction,
//! * [`spectrum`] assembles the linearised operator and its modes,
//! * [`runner`] ties everything together behind the `corevac` CLI.

pub mod diagnostics;
pub mod equilibrium;
pub mod ode;
pub mod quadrature;
pub mod runner;
pub mod solver;
pub mod spectrum;

pub use diagnostics::{DecayFit, EnergyReport, EulerianFields};
pub use equilibrium::{EquilibriumProfile, GasParameters, PoissonEquilibriumProfile};
pub use solver::{Grid, SimState, Trajectory};
pub use spectrum::SpectrumResult;
