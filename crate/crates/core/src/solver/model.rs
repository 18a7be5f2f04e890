use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Grid, Result, SolverError};
use crate::equilibrium::EquilibriumProfile;

/// Largest perturbation amplitude accepted by [`apply_perturbation`].
pub const MAX_AMPLITUDE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub cfl: f64,
    /// Lower bound on `1 + ζ + yζ_y` (and `1 + ζ`).
    pub jacobian_floor: f64,
    /// Upper cap on the time step, in damping times.
    pub dt_cap: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            jacobian_floor: 0.1,
            dt_cap: 0.1,
        }
    }
}

/// Background coefficients sampled on the grid, shared by every state of
/// a run.
#[derive(Debug, Clone)]
pub struct Model {
    pub profile: EquilibriumProfile,
    pub grid: Grid,
    pub options: SolverOptions,
    pub(crate) sigma: Vec<f64>,
    pub(crate) sigma_y: Vec<f64>,
    pub(crate) rho: Vec<f64>,
    /// `4π ∫_{r₀}^{y} ρ̄ τ² dτ`, fixed in Lagrangian labels.
    pub(crate) enclosed_mass: Vec<f64>,
}

impl Model {
    pub fn new(profile: EquilibriumProfile, grid: Grid, options: SolverOptions) -> Self {
        let (sigma, sigma_y): (Vec<f64>, Vec<f64>) = grid
            .nodes()
            .iter()
            .map(|&y| profile.sigma_and_slope_unchecked(y))
            .unzip();
        let rho = grid.nodes().iter().map(|&y| profile.density_unchecked(y)).collect();
        let mut enclosed_mass = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        let mut prev = profile.core_radius();
        for &y in grid.nodes() {
            if y > prev {
                acc += profile.enclosed_mass(y) - profile.enclosed_mass(prev);
            }
            enclosed_mass.push(acc);
            prev = y;
        }
        Self {
            profile,
            grid,
            options,
            sigma,
            sigma_y,
            rho,
            enclosed_mass,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }
    pub fn sigma_y(&self) -> &[f64] {
        &self.sigma_y
    }
    pub fn density(&self) -> &[f64] {
        &self.rho
    }
    pub fn enclosed_mass(&self) -> &[f64] {
        &self.enclosed_mass
    }
}

/// Graded grid on the profile's reference interval `[r₀, R]`.
pub fn build_grid(profile: &EquilibriumProfile, n_cells: usize, grading_power: f64) -> Result<Grid> {
    Grid::new(profile.core_radius(), profile.outer_radius(), n_cells, grading_power)
}

/// Lagrangian perturbation fields at one instant.
#[derive(Debug, Clone)]
pub struct SimState {
    pub model: Arc<Model>,
    pub zeta: Vec<f64>,
    pub zeta_t: Vec<f64>,
    pub time: f64,
    pub gravity_enabled: bool,
}

impl SimState {
    /// The equilibrium `ζ ≡ 0` at `t = 0`.
    pub fn equilibrium(model: Arc<Model>) -> Self {
        let n = model.grid.len();
        Self {
            model,
            zeta: vec![0.0; n],
            zeta_t: vec![0.0; n],
            time: 0.0,
            gravity_enabled: false,
        }
    }

    pub fn with_gravity(mut self, enabled: bool) -> Self {
        self.gravity_enabled = enabled;
        self
    }

    pub fn nodes(&self) -> &[f64] {
        self.model.nodes()
    }

    pub fn profile(&self) -> &EquilibriumProfile {
        &self.model.profile
    }

    pub(crate) fn pin(&mut self) {
        self.zeta[0] = 0.0;
        self.zeta_t[0] = 0.0;
    }

    /// `1 + ζ + yζ_y` at every node.
    pub fn stretch(&self) -> Vec<f64> {
        let zy = self.model.grid.d1().apply(&self.zeta);
        self.nodes()
            .iter()
            .zip(&self.zeta)
            .zip(&zy)
            .map(|((y, z), zy)| 1.0 + z + y * zy)
            .collect()
    }

    /// `(1+ζ)²(1+ζ+yζ_y)` at every node.
    pub fn jacobian(&self) -> Vec<f64> {
        self.stretch()
            .iter()
            .zip(&self.zeta)
            .map(|(s, z)| (1.0 + z).powi(2) * s)
            .collect()
    }
}

/// The spatial part `N(ζ)` of `ζ_tt = -ζ_t + N(ζ)`.
///
/// Written with `ln1p`/`expm1` so the result is exactly zero at `ζ ≡ 0` and
/// keeps relative accuracy for tiny perturbations.
pub fn spatial_operator(model: &Model, zeta: &[f64], gravity: bool) -> Result<Vec<f64>> {
    let grid = &model.grid;
    let y = grid.nodes();
    let n = grid.len();
    let params = model.profile.params();
    let g = params.gamma;
    let a_const = params.pressure_const;
    let floor = model.options.jacobian_floor;
    let big_g = params.self_gravity_const;
    let gk = g / (g - 1.0);

    let mut out = vec![0.0; n];
    for k in 1..n {
        let z = zeta[k];
        let zy = grid.d1().at(k, zeta);
        let zyy = grid.d2().at(k, zeta);
        let one_z = 1.0 + z;
        let dil = z + y[k] * zy;
        let s = 1.0 + dil;
        if !(s > floor && one_z > floor) {
            return Err(SolverError::JacobianDegenerate {
                node: k,
                y: y[k],
                value: s.min(one_z),
                floor,
            });
        }
        let la = z.ln_1p();
        let lb = dil.ln_1p();
        // (1+ζ)²[(1+ζ)^{-2γ} s^{-γ}]_y
        let p = ((2.0 - 2.0 * g) * la - g * lb).exp();
        let flux = -g * p * (2.0 * zy / one_z + (2.0 * zy + y[k] * zyy) / s);
        // (1+ζ)^{2-2γ} s^{-γ} - (1+ζ)^{-2}
        let bracket = (-2.0 * la).exp() * ((4.0 - 2.0 * g) * la - g * lb).exp_m1();
        let mut rhs = a_const * (model.sigma[k] * flux + gk * model.sigma_y[k] * bracket);
        if gravity && big_g > 0.0 {
            rhs += big_g * model.enclosed_mass[k] / (y[k] * y[k]) * (-2.0 * la).exp_m1();
        }
        out[k] = -rhs / y[k];
    }
    Ok(out)
}

/// `ζ_tt` from the ρ̄-divided perturbation equation.
pub fn acceleration(state: &SimState) -> Result<Vec<f64>> {
    let mut acc = spatial_operator(&state.model, &state.zeta, state.gravity_enabled)?;
    for (a, v) in acc.iter_mut().zip(&state.zeta_t) {
        *a -= v;
    }
    acc[0] = 0.0;
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    Displacement,
    Velocity,
}

/// Default order of vanishing of the perturbation shape at the core.
///
/// A pinned core forces `∂_t^k ζ(r₀, t) = 0`. The energies carry four
/// derivatives in total, so the data must satisfy this through `k = 3`;
/// for displacement data that means `N(ζ₀)(r₀) = 0`, which a shape
/// vanishing to third order gives for free. Without it the mismatch
/// launches a corner singularity that steepens at the vacuum.
pub const DEFAULT_CORE_ORDER: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub mode: u32,
    pub amplitude: f64,
    pub kind: PerturbationKind,
    /// Power `q ≥ 1` of the sine; the shape vanishes to order `q` at `r₀`.
    pub core_order: u32,
}

impl Perturbation {
    pub fn new(mode: u32, amplitude: f64, kind: PerturbationKind) -> Self {
        Self {
            mode,
            amplitude,
            kind,
            core_order: DEFAULT_CORE_ORDER,
        }
    }

    pub fn with_core_order(mut self, q: u32) -> Self {
        self.core_order = q;
        self
    }

    /// `sin(mπ(y - r₀) / (2(R - r₀)))^q`, zero at the core, free at `R`.
    pub fn shape(&self, profile: &EquilibriumProfile, y: f64) -> f64 {
        let r0 = profile.core_radius();
        let len = profile.outer_radius() - r0;
        (self.mode as f64 * PI * (y - r0) / (2.0 * len))
            .sin()
            .powi(self.core_order as i32)
    }
}

pub fn apply_perturbation(state: &SimState, family: &Perturbation) -> Result<SimState> {
    if !(family.amplitude.abs() <= MAX_AMPLITUDE) {
        return Err(SolverError::AmplitudeTooLarge(family.amplitude));
    }
    if family.mode == 0 || family.core_order == 0 {
        return Err(SolverError::InvalidPerturbation {
            mode: family.mode,
            core_order: family.core_order,
        });
    }
    let mut out = state.clone();
    let profile = state.model.profile;
    let target = match family.kind {
        PerturbationKind::Displacement => &mut out.zeta,
        PerturbationKind::Velocity => &mut out.zeta_t,
    };
    for (v, &y) in target.iter_mut().zip(state.model.nodes()) {
        *v += family.amplitude * family.shape(&profile, y);
    }
    out.pin();
    Ok(out)
}
