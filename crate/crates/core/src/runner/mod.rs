//! Scenario files in, deterministic artifacts out.
//!
//! A run parses a [`ScenarioConfig`], executes one [`Preset`] and writes
//! `report.json` (config echo, energy rows, fits, spectra and one
//! [`Assertion`] per check), `timeseries.csv` and `timing.json`.

mod config;
mod presets;
mod report;

use thiserror::Error;

pub use config::{
    parse_config, ConfigError, GridConfig, HardyConfig, PoissonConfig, RadiusSpec, RunConfig,
    ScenarioConfig, SpectrumConfig, SweepConfig, DEFAULT_GRADING_POWER, DEFAULT_N_CELLS, KEYS,
};
pub use presets::{run_preset, run_preset_with_jobs, Preset};
pub use report::{
    csv_string, emit_csv, emit_json, format_number, report_json, write_outputs, Assertion,
    HardyCase, PointwiseFits, PoissonSummary, RunReport, SnapshotRow, SweepCase, CSV_FILE,
    CSV_HEADER, REPORT_FILE, TIMING_FILE,
};

use crate::diagnostics::DiagnosticsError;
use crate::equilibrium::EquilibriumError;
use crate::solver::SolverError;
use crate::spectrum::SpectrumError;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("unknown preset `{0}`; run `corevac presets` for the list")]
    UnknownPreset(String),
    #[error("{context}: {source}")]
    Equilibrium {
        context: &'static str,
        source: EquilibriumError,
    },
    #[error("{context}: {source}")]
    Solver {
        context: &'static str,
        source: SolverError,
    },
    #[error("{context}: {source}")]
    Diagnostics {
        context: &'static str,
        source: DiagnosticsError,
    },
    #[error("{context}: {source}")]
    Spectrum {
        context: &'static str,
        source: SpectrumError,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl RunnerError {
    fn equilibrium(context: &'static str) -> impl Fn(EquilibriumError) -> Self {
        move |source| Self::Equilibrium { context, source }
    }
    fn solver(context: &'static str) -> impl Fn(SolverError) -> Self {
        move |source| Self::Solver { context, source }
    }
    fn diagnostics(context: &'static str) -> impl Fn(DiagnosticsError) -> Self {
        move |source| Self::Diagnostics { context, source }
    }
    fn spectrum(context: &'static str) -> impl Fn(SpectrumError) -> Self {
        move |source| Self::Spectrum { context, source }
    }
}

pub type Result<T> = std::result::Result<T, RunnerError>;
