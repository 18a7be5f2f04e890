//! Linear stability of the equilibrium.
//!
//! Linearising the perturbation equation about `ζ = 0` gives
//! `W ζ_tt + W ζ_t + L ζ = 0` with `W = yρ̄` and
//! `L ζ = A ({ρ̄^γ[(4-3γ)ζ - γ y ζ_y]}_y - 4 ρ̄^γ ζ_y)`.
//! Modes `ζ = e^{λt} v` with `L v = μ W v` satisfy `λ² + λ + μ = 0`.
//! The eigenproblem is solved in the ρ̄-divided form `D = W⁻¹ L`, which
//! stays regular at the vacuum node.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::EquilibriumProfile;
use crate::solver::Grid;

type C64 = Complex<f64>;

/// Nodes with `yρ̄ < floor · max(yρ̄)` use the reduced (σ-free) row.
pub const DEFAULT_NODE_FLOOR: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("eigensolver failed: {0}")]
    EigensolverFailure(String),
    #[error("mode {index} is not decaying: mu = {mu}")]
    UnstableMode { index: usize, mu: f64 },
    #[error("empty spectrum")]
    Empty,
}

pub type Result<T> = std::result::Result<T, SpectrumError>;

/// Discrete linearised operator on the solver's grid.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    /// `L`: ρ̄-weighted rows; Dirichlet row at `r₀`; reduced divided row at `R`.
    pub operator: DMatrix<f64>,
    /// `W = yρ̄` at the nodes.
    pub weight: DVector<f64>,
    /// σ-weighted part of the divided operator (second-order terms).
    divided_flux: DMatrix<f64>,
    /// σ_y-weighted part of the divided operator (first-order terms).
    divided_slope: DMatrix<f64>,
}

impl LinearizedOperator {
    /// The divided operator `D` with `ζ_tt = -ζ_t - D ζ` (row 0 zero).
    pub fn divided(&self) -> DMatrix<f64> {
        &self.divided_flux + &self.divided_slope
    }

    /// `D v` on a nodal field.
    pub fn apply_divided(&self, v: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(v);
        (self.divided() * x).iter().copied().collect()
    }

    /// `L v` on a nodal field.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(v);
        (&self.operator * x).iter().copied().collect()
    }
}

pub fn assemble_linearized(profile: &EquilibriumProfile, grid: &Grid) -> LinearizedOperator {
    let y = grid.nodes();
    let n = grid.len();
    let params = profile.params();
    let g = params.gamma;
    let a = params.pressure_const;
    let gk = g / (g - 1.0);
    let mut flux = DMatrix::<f64>::zeros(n, n);
    let mut slope = DMatrix::<f64>::zeros(n, n);
    let mut weight = DVector::<f64>::zeros(n);
    for k in 0..n {
        weight[k] = y[k] * profile.density_unchecked(y[k]);
    }
    for k in 1..n {
        let (sigma, sigma_y) = profile.sigma_and_slope_unchecked(y[k]);
        let c_flux = a * (-g) * sigma / y[k];
        let c_slope = a * gk * sigma_y / y[k];
        // -γσ(4ζ_y + yζ_yy)
        for (j, w) in grid.d1().row(k) {
            flux[(k, j)] += c_flux * 4.0 * w;
            slope[(k, j)] += c_slope * (-g * y[k]) * w;
        }
        for (j, w) in grid.d2().row(k) {
            flux[(k, j)] += c_flux * y[k] * w;
        }
        slope[(k, k)] += c_slope * (4.0 - 3.0 * g);
    }
    let divided = &flux + &slope;
    let mut operator = DMatrix::<f64>::zeros(n, n);
    operator[(0, 0)] = 1.0;
    for k in 1..n {
        let scale = if weight[k] > 0.0 { weight[k] } else { 1.0 };
        for j in 0..n {
            operator[(k, j)] = scale * divided[(k, j)];
        }
    }
    LinearizedOperator {
        operator,
        weight,
        divided_flux: flux,
        divided_slope: slope,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    /// `Re μ`.
    pub mu: f64,
    /// `Im μ` (zero for a self-adjoint discretisation; monitored).
    pub mu_imag: f64,
    /// Roots of `λ² + λ + μ = 0` as `[re, im]`, slow root first.
    pub lambda: [[f64; 2]; 2],
    /// `‖D v - μ v‖ / ‖v‖` for the computed eigenvector.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Retained modes, sorted by `Re μ` ascending.
    pub modes: Vec<Mode>,
    pub n_modes: usize,
    /// `2 · min_k(-max Re λ_k)`; `None` if some retained mode is unstable.
    pub predicted_delta: Option<f64>,
    /// Smallest `Re μ` over the whole discrete spectrum.
    pub min_mu_all: f64,
    /// Largest `|Im μ|` over the whole discrete spectrum.
    pub max_mu_imag_all: f64,
    /// Number of unknowns in the eigenproblem.
    pub size: usize,
}

impl SpectrumResult {
    pub fn mu(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.mu).collect()
    }
}

/// Roots of `λ² + λ + μ = 0`, slow (larger real part) first.
pub fn lambda_roots(mu: C64) -> [C64; 2] {
    let disc = (C64::new(1.0, 0.0) - 4.0 * mu).sqrt();
    let a = (C64::new(-1.0, 0.0) + disc) * 0.5;
    let b = (C64::new(-1.0, 0.0) - disc) * 0.5;
    if a.re >= b.re {
        [a, b]
    } else {
        [b, a]
    }
}

pub fn eigen_modes(op: &LinearizedOperator, n_keep: usize) -> Result<SpectrumResult> {
    eigen_modes_with_floor(op, n_keep, DEFAULT_NODE_FLOOR)
}

pub fn eigen_modes_with_floor(op: &LinearizedOperator, n_keep: usize, floor: f64) -> Result<SpectrumResult> {
    let n = op.weight.len();
    let wmax = op.weight.max();
    let m = n - 1;
    let mut k = DMatrix::<f64>::zeros(m, m);
    for r in 1..n {
        let reduced = op.weight[r] < floor * wmax;
        for c in 1..n {
            let flux = if reduced { 0.0 } else { op.divided_flux[(r, c)] };
            k[(r - 1, c - 1)] = flux + op.divided_slope[(r, c)];
        }
    }
    let eig = k.clone().complex_eigenvalues();
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        let norm = k.norm();
        return Err(SpectrumError::EigensolverFailure(format!(
            "non-finite eigenvalues (size {m}, Frobenius norm {norm:e})"
        )));
    }
    let mut all: Vec<C64> = eig.iter().copied().collect();
    all.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    if all.is_empty() {
        return Err(SpectrumError::Empty);
    }
    let min_mu_all = all[0].re;
    let max_mu_imag_all = all.iter().map(|z| z.im.abs()).fold(0.0, f64::max);

    let kc = k.map(|v| C64::new(v, 0.0));
    let mut modes = Vec::new();
    for mu in all.iter().copied() {
        if modes.len() >= n_keep {
            break;
        }
        // Conjugate pairs: keep one representative.
        if mu.im < -1e-12 * mu.norm().max(1.0) {
            continue;
        }
        let residual = eigen_residual(&kc, mu);
        let l = lambda_roots(mu);
        modes.push(Mode {
            mu: mu.re,
            mu_imag: mu.im,
            lambda: [[l[0].re, l[0].im], [l[1].re, l[1].im]],
            residual,
        });
    }
    let mut result = SpectrumResult {
        n_modes: modes.len(),
        modes,
        predicted_delta: None,
        min_mu_all,
        max_mu_imag_all,
        size: m,
    };
    result.predicted_delta = predicted_delta(&result).ok();
    Ok(result)
}

/// Inverse iteration for the eigenvector of `mu`, then its residual.
fn eigen_residual(k: &DMatrix<C64>, mu: C64) -> f64 {
    let m = k.nrows();
    let shift = mu + C64::new(1e-10 * mu.norm().max(1.0), 0.0);
    let mut a = k.clone();
    for i in 0..m {
        a[(i, i)] -= shift;
    }
    let lu = a.lu();
    let mut v = DVector::<C64>::from_fn(m, |i, _| C64::new(1.0 + (i as f64 * 0.37).sin(), 0.0));
    for _ in 0..3 {
        match lu.solve(&v) {
            Some(x) => {
                let nrm = x.norm();
                if !(nrm > 0.0 && nrm.is_finite()) {
                    return f64::NAN;
                }
                v = x / C64::new(nrm, 0.0);
            }
            None => break,
        }
    }
    let r = k * &v - &v * mu;
    r.norm() / v.norm()
}

/// Energy decay rate implied by the slowest mode, capped by the damping.
pub fn predicted_delta(result: &SpectrumResult) -> Result<f64> {
    if result.modes.is_empty() {
        return Err(SpectrumError::Empty);
    }
    let mut best = f64::INFINITY;
    for (index, m) in result.modes.iter().enumerate() {
        if !(m.mu > 0.0) {
            return Err(SpectrumError::UnstableMode { index, mu: m.mu });
        }
        let slow = m.lambda[0][0].max(m.lambda[1][0]);
        best = best.min(-slow);
    }
    Ok(2.0 * best)
}

/// `δ` for a single real `μ > 0`: `1 - √(1 - 4μ)` below `1/4`, else 1.
pub fn delta_for_mu(mu: f64) -> f64 {
    if mu >= 0.25 {
        1.0
    } else {
        1.0 - (1.0 - 4.0 * mu).sqrt()
    }
}
