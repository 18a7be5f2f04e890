use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::diagnostics::{DecayFit, EnergyReport, HardyWitness};
use crate::spectrum::SpectrumResult;

pub const CSV_HEADER: &str = "t,E0,E1,E2,E01,E_total,D0,max_zeta,max_u,R_t,mass,vacuum_slope";

/// One CSV row per snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub t: f64,
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub e01: f64,
    pub e_total: f64,
    pub d0: f64,
    /// `max_y |ζ|`.
    pub max_zeta: f64,
    /// `max_y |y ζ_t|`, the Eulerian velocity at the particle.
    pub max_u: f64,
    /// Boundary radius `R (1 + ζ(R))`.
    pub r_t: f64,
    /// Reconstructed Eulerian mass `4π ∫ ρ r² dr`.
    pub mass: f64,
    /// `∂_r ρ^{γ-1}` at the moving boundary.
    pub vacuum_slope: f64,
}

impl SnapshotRow {
    pub(crate) fn fields(&self) -> [f64; 12] {
        [
            self.t,
            self.e0,
            self.e1,
            self.e2,
            self.e01,
            self.e_total,
            self.d0,
            self.max_zeta,
            self.max_u,
            self.r_t,
            self.mass,
            self.vacuum_slope,
        ]
    }
}

/// A named check with its measured value and acceptance interval.
/// Open bounds are `None`; `strict` makes the bounds exclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub measured: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub strict: bool,
    pub pass: bool,
}

impl Assertion {
    pub fn within(name: impl Into<String>, measured: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        Self::build(name.into(), measured, lower, upper, false)
    }
    pub fn at_most(name: impl Into<String>, measured: f64, upper: f64) -> Self {
        Self::within(name, measured, None, Some(upper))
    }
    pub fn at_least(name: impl Into<String>, measured: f64, lower: f64) -> Self {
        Self::within(name, measured, Some(lower), None)
    }
    pub fn above(name: impl Into<String>, measured: f64, lower: f64) -> Self {
        Self::build(name.into(), measured, Some(lower), None, true)
    }
    pub fn below(name: impl Into<String>, measured: f64, upper: f64) -> Self {
        Self::build(name.into(), measured, None, Some(upper), true)
    }

    fn build(name: String, measured: f64, lower: Option<f64>, upper: Option<f64>, strict: bool) -> Self {
        // NaN fails every comparison and therefore every assertion.
        let lo_ok = lower.map_or(measured.is_finite(), |l| if strict { measured > l } else { measured >= l });
        let hi_ok = upper.map_or(measured.is_finite(), |u| if strict { measured < u } else { measured <= u });
        Self {
            name,
            measured,
            lower,
            upper,
            strict,
            pass: lo_ok && hi_ok,
        }
    }

    /// `PASS name = value (in [lo, hi])`.
    pub fn summary(&self) -> String {
        let (open, close) = if self.strict { ("(", ")") } else { ("[", "]") };
        let lo = self.lower.map_or("-inf".to_string(), |v| format!("{v:e}"));
        let hi = self.upper.map_or("inf".to_string(), |v| format!("{v:e}"));
        format!(
            "{} {} = {:e} (required in {open}{lo}, {hi}{close})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseFits {
    pub velocity: Option<DecayFit>,
    pub boundary: Option<DecayFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCase {
    pub gamma: f64,
    pub outer_radius: f64,
    pub window_upper: f64,
    pub mu: Vec<f64>,
    pub predicted_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonSummary {
    pub central_density: f64,
    pub closed_form_radius: f64,
    pub first_zero_radius: f64,
    pub total_mass: f64,
    pub max_residual: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyCase {
    pub family: String,
    pub coarse: HardyWitness,
    pub fine: HardyWitness,
}

/// Everything a preset produced. Serialized as `report.json`; the
/// wall-clock timing is kept out of it so that the file depends on the
/// config alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub preset: String,
    pub config: ScenarioConfig,
    pub rows: Vec<SnapshotRow>,
    pub energies: Vec<EnergyReport>,
    pub decay_fit: Option<DecayFit>,
    pub pointwise: Option<PointwiseFits>,
    pub spectrum: Option<SpectrumResult>,
    pub spectrum_compare: Option<SpectrumResult>,
    pub sweep: Vec<SweepCase>,
    pub poisson: Option<PoissonSummary>,
    pub hardy: Vec<HardyCase>,
    pub assertions: Vec<Assertion>,
    pub pass: bool,
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn new(config: &ScenarioConfig) -> Self {
        Self {
            preset: config.preset.clone(),
            config: config.clone(),
            rows: Vec::new(),
            energies: Vec::new(),
            decay_fit: None,
            pointwise: None,
            spectrum: None,
            spectrum_compare: None,
            sweep: Vec::new(),
            poisson: None,
            hardy: Vec::new(),
            assertions: Vec::new(),
            pass: true,
            wall_seconds: 0.0,
        }
    }

    pub fn check(&mut self, a: Assertion) {
        self.pass &= a.pass;
        self.assertions.push(a);
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    /// Process exit code: 0 exactly when every assertion passes.
    pub fn exit_code(&self) -> u8 {
        u8::from(!self.pass)
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_string(rows: &[SnapshotRow]) -> String {
    let mut out = String::with_capacity(CSV_HEADER.len() + 1 + rows.len() * 12 * 24);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.fields().iter().map(|v| format_number(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_csv(report: &RunReport, path: &Path) -> io::Result<()> {
    fs::write(path, csv_string(&report.rows))
}

pub fn report_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report is plain data");
    s.push('\n');
    s
}

pub fn emit_json(report: &RunReport, path: &Path) -> io::Result<()> {
    fs::write(path, report_json(report))
}

pub const REPORT_FILE: &str = "report.json";
pub const CSV_FILE: &str = "timeseries.csv";
pub const TIMING_FILE: &str = "timing.json";

/// Write `report.json`, `timeseries.csv` and `timing.json` into `dir`.
pub fn write_outputs(report: &RunReport, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    emit_json(report, &dir.join(REPORT_FILE))?;
    emit_csv(report, &dir.join(CSV_FILE))?;
    let timing = serde_json::json!({
        "preset": report.preset,
        "wall_seconds": report.wall_seconds,
    });
    let mut f = fs::File::create(dir.join(TIMING_FILE))?;
    writeln!(f, "{}", serde_json::to_string_pretty(&timing).expect("plain data"))
}
