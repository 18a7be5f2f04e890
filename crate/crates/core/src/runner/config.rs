//! Flat `key = value` scenario files.
//!
//! ```text
//! # reference decay run
//! preset = decay
//! gas.gamma = 1.6666666666666667
//! radius.outer = 2.5
//! perturbation.amplitude = 1e-3
//! ```
//!
//! Keys are dotted paths, `#` starts a comment, lists are comma separated.
//! Every key except `preset`, `gas.gamma` and one of `radius.outer` /
//! `radius.mass` has a default.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::GasParameters;
use crate::solver::{Perturbation, PerturbationKind, SolverOptions, MAX_AMPLITUDE};
use crate::spectrum::DEFAULT_NODE_FLOOR;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
    #[error("unknown keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Exactly one way of fixing the outer radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusSpec {
    Outer(f64),
    Mass(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n_cells: usize,
    pub grading_power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub t_end: f64,
    pub snapshot_every: f64,
    /// Decay-fit window `[fit_start, fit_end]`; `fit_start` also marks the
    /// end of the transient.
    pub fit_window: [f64; 2],
    /// Mesh for the elliptic-ratio stability rerun; 0 skips it.
    pub compare_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub n_modes: usize,
    /// Mesh for the eigenvalue convergence check; 0 skips it.
    pub compare_cells: usize,
    pub node_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub gammas: Vec<f64>,
    /// Sample radii `R = r₀ + f (R_max - r₀)` inside the window.
    pub fractions: Vec<f64>,
    pub n_cells: usize,
    pub n_modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyConfig {
    pub exponents: Vec<f64>,
    pub n_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonConfig {
    /// Integration gives up beyond `radius_cap · r₀`.
    pub radius_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub preset: String,
    pub gas: GasParameters,
    pub radius: RadiusSpec,
    pub grid: GridConfig,
    pub solver: SolverOptions,
    pub perturbation: Perturbation,
    pub run: RunConfig,
    pub spectrum: SpectrumConfig,
    pub sweep: SweepConfig,
    pub hardy: HardyConfig,
    pub poisson: PoissonConfig,
}

pub const DEFAULT_N_CELLS: usize = 256;
pub const DEFAULT_GRADING_POWER: f64 = 2.0;

impl ScenarioConfig {
    /// Defaults around the given required fields.
    pub fn new(preset: &str, gamma: f64, radius: RadiusSpec) -> Self {
        Self {
            preset: preset.to_string(),
            gas: GasParameters {
                gamma,
                pressure_const: 1.0,
                core_gravity: 1.0,
                core_radius: 1.0,
                self_gravity_const: 0.0,
            },
            radius,
            grid: GridConfig {
                n_cells: DEFAULT_N_CELLS,
                grading_power: DEFAULT_GRADING_POWER,
            },
            solver: SolverOptions::default(),
            perturbation: Perturbation::new(1, 0.0, PerturbationKind::Displacement),
            run: RunConfig {
                t_end: 40.0,
                snapshot_every: 0.25,
                fit_window: [5.0, 40.0],
                compare_cells: 512,
            },
            spectrum: SpectrumConfig {
                n_modes: 5,
                compare_cells: 512,
                node_floor: DEFAULT_NODE_FLOOR,
            },
            sweep: SweepConfig {
                gammas: vec![1.4, 5.0 / 3.0, 2.0],
                fractions: vec![1.0 / 3.0, 2.0 / 3.0, 1.0],
                n_cells: 96,
                n_modes: 8,
            },
            hardy: HardyConfig {
                exponents: vec![1.5, 2.0, 3.0],
                n_cells: 128,
            },
            poisson: PoissonConfig { radius_cap: 1e3 },
        }
    }

    /// Range checks; the first offending field is reported.
    pub fn validate(&self) -> Result<()> {
        let g = &self.gas;
        check("gas.gamma", g.gamma, g.gamma > 1.0, "must exceed 1")?;
        check("gas.pressure_const", g.pressure_const, g.pressure_const > 0.0, "must be positive")?;
        check("gas.core_gravity", g.core_gravity, g.core_gravity > 0.0, "must be positive")?;
        check("gas.core_radius", g.core_radius, g.core_radius > 0.0, "must be positive")?;
        check("gas.self_gravity", g.self_gravity_const, g.self_gravity_const >= 0.0, "must be >= 0")?;
        match self.radius {
            RadiusSpec::Outer(r) => {
                check("radius.outer", r, r > g.core_radius, "must exceed gas.core_radius")?
            }
            RadiusSpec::Mass(m) => check("radius.mass", m, m > 0.0, "must be positive")?,
        }
        cells("grid.n_cells", self.grid.n_cells, false)?;
        let p = self.grid.grading_power;
        check("grid.grading_power", p, (1.0..=8.0).contains(&p), "must lie in [1, 8]")?;
        let s = &self.solver;
        check("solver.cfl", s.cfl, s.cfl > 0.0 && s.cfl <= 1.0, "must lie in (0, 1]")?;
        let jf = s.jacobian_floor;
        check("solver.jacobian_floor", jf, jf > 0.0 && jf < 1.0, "must lie in (0, 1)")?;
        check("solver.dt_cap", s.dt_cap, s.dt_cap > 0.0, "must be positive")?;
        let pt = &self.perturbation;
        positive_int("perturbation.mode", pt.mode as usize)?;
        positive_int("perturbation.core_order", pt.core_order as usize)?;
        let a = pt.amplitude;
        check("perturbation.amplitude", a, a.abs() <= MAX_AMPLITUDE, "magnitude exceeds 0.05")?;
        let r = &self.run;
        check("run.t_end", r.t_end, r.t_end > 0.0, "must be positive")?;
        let se = r.snapshot_every;
        check("run.snapshot_every", se, se > 0.0 && se <= r.t_end, "must lie in (0, run.t_end]")?;
        let [lo, hi] = r.fit_window;
        check("run.fit_start", lo, lo >= 0.0 && lo < hi, "must lie in [0, run.fit_end)")?;
        check("run.fit_end", hi, hi <= r.t_end, "must not exceed run.t_end")?;
        cells("run.compare_cells", r.compare_cells, true)?;
        positive_int("spectrum.n_modes", self.spectrum.n_modes)?;
        cells("spectrum.compare_cells", self.spectrum.compare_cells, true)?;
        let nf = self.spectrum.node_floor;
        check("spectrum.node_floor", nf, (0.0..1.0).contains(&nf), "must lie in [0, 1)")?;
        nonempty("sweep.gammas", &self.sweep.gammas)?;
        for &x in &self.sweep.gammas {
            check("sweep.gammas", x, x > 4.0 / 3.0, "each must exceed 4/3 (finite window)")?;
        }
        nonempty("sweep.fractions", &self.sweep.fractions)?;
        for &x in &self.sweep.fractions {
            check("sweep.fractions", x, x > 0.0 && x <= 1.0, "each must lie in (0, 1]")?;
        }
        cells("sweep.n_cells", self.sweep.n_cells, false)?;
        positive_int("sweep.n_modes", self.sweep.n_modes)?;
        nonempty("hardy.exponents", &self.hardy.exponents)?;
        for &x in &self.hardy.exponents {
            check("hardy.exponents", x, x > 1.0, "each must exceed 1")?;
        }
        cells("hardy.n_cells", self.hardy.n_cells, false)?;
        let cap = self.poisson.radius_cap;
        check("poisson.radius_cap", cap, cap > 1.0, "must exceed 1")?;
        Ok(())
    }

    /// Canonical text form; every key is written, so the output reparses
    /// to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        let g = &self.gas;
        kv("preset", self.preset.clone());
        kv("gas.gamma", g.gamma.to_string());
        kv("gas.pressure_const", g.pressure_const.to_string());
        kv("gas.core_gravity", g.core_gravity.to_string());
        kv("gas.core_radius", g.core_radius.to_string());
        kv("gas.self_gravity", g.self_gravity_const.to_string());
        match self.radius {
            RadiusSpec::Outer(r) => kv("radius.outer", r.to_string()),
            RadiusSpec::Mass(m) => kv("radius.mass", m.to_string()),
        }
        kv("grid.n_cells", self.grid.n_cells.to_string());
        kv("grid.grading_power", self.grid.grading_power.to_string());
        kv("solver.cfl", self.solver.cfl.to_string());
        kv("solver.jacobian_floor", self.solver.jacobian_floor.to_string());
        kv("solver.dt_cap", self.solver.dt_cap.to_string());
        let p = &self.perturbation;
        let kind = match p.kind {
            PerturbationKind::Displacement => "displacement",
            PerturbationKind::Velocity => "velocity",
        };
        kv("perturbation.kind", kind.to_string());
        kv("perturbation.mode", p.mode.to_string());
        kv("perturbation.amplitude", p.amplitude.to_string());
        kv("perturbation.core_order", p.core_order.to_string());
        kv("run.t_end", self.run.t_end.to_string());
        kv("run.snapshot_every", self.run.snapshot_every.to_string());
        kv("run.fit_start", self.run.fit_window[0].to_string());
        kv("run.fit_end", self.run.fit_window[1].to_string());
        kv("run.compare_cells", self.run.compare_cells.to_string());
        kv("spectrum.n_modes", self.spectrum.n_modes.to_string());
        kv("spectrum.compare_cells", self.spectrum.compare_cells.to_string());
        kv("spectrum.node_floor", self.spectrum.node_floor.to_string());
        kv("sweep.gammas", list(&self.sweep.gammas));
        kv("sweep.fractions", list(&self.sweep.fractions));
        kv("sweep.n_cells", self.sweep.n_cells.to_string());
        kv("sweep.n_modes", self.sweep.n_modes.to_string());
        kv("hardy.exponents", list(&self.hardy.exponents));
        kv("hardy.n_cells", self.hardy.n_cells.to_string());
        kv("poisson.radius_cap", self.poisson.radius_cap.to_string());
        out
    }
}

fn list(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

/// NaN fails every comparison, so `ok` already rejects it.
fn check(field: &str, value: f64, ok: bool, why: &str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("{value} {why}")))
    }
}

fn positive_int(field: &str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(invalid(field, "must be >= 1"))
    }
}

const MAX_CELLS: usize = 1 << 14;

fn cells(field: &str, n: usize, zero_disables: bool) -> Result<()> {
    if (zero_disables && n == 0) || (8..=MAX_CELLS).contains(&n) {
        Ok(())
    } else {
        Err(invalid(field, format!("{n} must lie in [8, {MAX_CELLS}]")))
    }
}

fn nonempty(field: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        Err(invalid(field, "must not be empty"))
    } else {
        Ok(())
    }
}

/// Every accepted key, in canonical order.
pub const KEYS: &[&str] = &[
    "preset",
    "gas.gamma",
    "gas.pressure_const",
    "gas.core_gravity",
    "gas.core_radius",
    "gas.self_gravity",
    "radius.outer",
    "radius.mass",
    "grid.n_cells",
    "grid.grading_power",
    "solver.cfl",
    "solver.jacobian_floor",
    "solver.dt_cap",
    "perturbation.kind",
    "perturbation.mode",
    "perturbation.amplitude",
    "perturbation.core_order",
    "run.t_end",
    "run.snapshot_every",
    "run.fit_start",
    "run.fit_end",
    "run.compare_cells",
    "spectrum.n_modes",
    "spectrum.compare_cells",
    "spectrum.node_floor",
    "sweep.gammas",
    "sweep.fractions",
    "sweep.n_cells",
    "sweep.n_modes",
    "hardy.exponents",
    "hardy.n_cells",
    "poisson.radius_cap",
];

/// Raw `key -> (line, value)` table.
struct Table(BTreeMap<String, (usize, String)>);

impl Table {
    fn take<T>(&mut self, key: &str, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<Option<T>> {
        match self.0.remove(key) {
            None => Ok(None),
            Some((line, raw)) => parse(&raw).map(Some).ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("{key}: expected {what}, got `{raw}`"),
            }),
        }
    }
    fn f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key, |s| s.parse().ok(), "a number")
    }
    fn usize(&mut self, key: &str) -> Result<Option<usize>> {
        self.take(key, |s| s.parse().ok(), "a nonnegative integer")
    }
    fn u32(&mut self, key: &str) -> Result<Option<u32>> {
        self.take(key, |s| s.parse().ok(), "a nonnegative integer")
    }
    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        self.take(
            key,
            |s| s.split(',').map(|x| x.trim().parse().ok()).collect(),
            "a comma-separated list of numbers",
        )
    }
}

fn tokenize(text: &str) -> Result<Table> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected `key = value`, got `{body}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        let key_ok = !k.is_empty()
            && k.split('.').all(|part| {
                !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            });
        if !key_ok {
            return Err(ConfigError::Parse {
                line,
                message: format!("malformed key `{k}`"),
            });
        }
        if v.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: format!("{k}: missing value"),
            });
        }
        if let Some((first, _)) = map.insert(k.to_string(), (line, v.to_string())) {
            return Err(ConfigError::Parse {
                line,
                message: format!("{k}: duplicate key (first set on line {first})"),
            });
        }
    }
    Ok(Table(map))
}

/// Parse, fill defaults and validate.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut t = tokenize(text)?;
    let unknown: Vec<String> = t.0.keys().filter(|k| !KEYS.contains(&k.as_str())).cloned().collect();
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown));
    }
    let preset = t
        .take("preset", |s| Some(s.to_string()), "a preset name")?
        .ok_or_else(|| invalid("preset", "required"))?;
    let gamma = t.f64("gas.gamma")?.ok_or_else(|| invalid("gas.gamma", "required"))?;
    let radius = match (t.f64("radius.outer")?, t.f64("radius.mass")?) {
        (Some(r), None) => RadiusSpec::Outer(r),
        (None, Some(m)) => RadiusSpec::Mass(m),
        (Some(_), Some(_)) => {
            return Err(invalid("radius", "give exactly one of radius.outer and radius.mass, not both"))
        }
        (None, None) => return Err(invalid("radius", "one of radius.outer or radius.mass is required")),
    };
    let mut c = ScenarioConfig::new(&preset, gamma, radius);

    macro_rules! set {
        ($slot:expr, $getter:ident, $key:literal) => {
            if let Some(v) = t.$getter($key)? {
                $slot = v;
            }
        };
    }
    set!(c.gas.pressure_const, f64, "gas.pressure_const");
    set!(c.gas.core_gravity, f64, "gas.core_gravity");
    set!(c.gas.core_radius, f64, "gas.core_radius");
    set!(c.gas.self_gravity_const, f64, "gas.self_gravity");
    set!(c.grid.n_cells, usize, "grid.n_cells");
    set!(c.grid.grading_power, f64, "grid.grading_power");
    set!(c.solver.cfl, f64, "solver.cfl");
    set!(c.solver.jacobian_floor, f64, "solver.jacobian_floor");
    set!(c.solver.dt_cap, f64, "solver.dt_cap");
    if let Some(kind) = t.take(
        "perturbation.kind",
        |s| match s {
            "displacement" => Some(PerturbationKind::Displacement),
            "velocity" => Some(PerturbationKind::Velocity),
            _ => None,
        },
        "`displacement` or `velocity`",
    )? {
        c.perturbation.kind = kind;
    }
    set!(c.perturbation.mode, u32, "perturbation.mode");
    set!(c.perturbation.amplitude, f64, "perturbation.amplitude");
    set!(c.perturbation.core_order, u32, "perturbation.core_order");
    set!(c.run.t_end, f64, "run.t_end");
    set!(c.run.snapshot_every, f64, "run.snapshot_every");
    // The default window `[min(5, t_end/8), t_end]` is `[5, 40]` for the
    // default run and stays valid for short ones.
    let fit_start = t.f64("run.fit_start")?.unwrap_or(5f64.min(c.run.t_end / 8.0));
    c.run.fit_window = [fit_start, t.f64("run.fit_end")?.unwrap_or(c.run.t_end)];
    set!(c.run.compare_cells, usize, "run.compare_cells");
    set!(c.spectrum.n_modes, usize, "spectrum.n_modes");
    set!(c.spectrum.compare_cells, usize, "spectrum.compare_cells");
    set!(c.spectrum.node_floor, f64, "spectrum.node_floor");
    set!(c.sweep.gammas, list, "sweep.gammas");
    set!(c.sweep.fractions, list, "sweep.fractions");
    set!(c.sweep.n_cells, usize, "sweep.n_cells");
    set!(c.sweep.n_modes, usize, "sweep.n_modes");
    set!(c.hardy.exponents, list, "hardy.exponents");
    set!(c.hardy.n_cells, usize, "hardy.n_cells");
    set!(c.poisson.radius_cap, f64, "poisson.radius_cap");
    debug_assert!(t.0.is_empty(), "every known key is consumed");
    c.validate()?;
    Ok(c)
}
