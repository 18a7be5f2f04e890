use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, Result};
use crate::equilibrium::EquilibriumProfile;
use crate::quadrature::{GL4_W, GL4_X};

/// Empirical constant of `∫ σ^{k-2} F² ≤ C ∫ σ^k (F² + F_y²)` on the
/// boundary half `I_b = [(R + r₀)/2, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyWitness {
    pub k: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, reported as 0 when both vanish.
    pub ratio: f64,
}

/// Nodes on `I_b` graded toward `R` with power 2.
pub fn hardy_grid(profile: &EquilibriumProfile, n_cells: usize) -> Vec<f64> {
    let r = profile.outer_radius();
    let a = 0.5 * (r + profile.core_radius());
    let n = n_cells as f64;
    let mut nodes: Vec<f64> = (0..=n_cells)
        .map(|k| a + (r - a) * (1.0 - (1.0 - k as f64 / n).powi(2)))
        .collect();
    nodes[n_cells] = r;
    nodes
}

/// Cubic Lagrange interpolation of nodal `f` at `z` within cell `k`.
fn interp(nodes: &[f64], f: &[f64], k: usize, z: f64) -> f64 {
    let n = nodes.len() - 1;
    let j0 = k.saturating_sub(1).min(n - 3);
    let mut acc = 0.0;
    for i in 0..4 {
        let mut l = 1.0;
        for j in 0..4 {
            if j != i {
                l *= (z - nodes[j0 + j]) / (nodes[j0 + i] - nodes[j0 + j]);
            }
        }
        acc += l * f[j0 + i];
    }
    acc
}

/// `∫ σ^β g dy` over the sampled interval. The cell touching `R` uses the
/// substitution `y = R - h u²`, which absorbs `σ^β` singularities down to
/// `β > -1`.
fn weighted_integral<G>(profile: &EquilibriumProfile, nodes: &[f64], beta: f64, g: G) -> f64
where
    G: Fn(usize, f64) -> f64,
{
    let r = profile.outer_radius();
    let sigma = |y: f64| profile.sigma_and_slope_unchecked(y).0;
    let n = nodes.len() - 1;
    let mut acc = 0.0;
    for k in 0..n {
        let (a, b) = (nodes[k], nodes[k + 1]);
        let h = b - a;
        if k + 1 == n && b >= r {
            for (x, w) in GL4_X.iter().zip(GL4_W) {
                let u = 0.5 * (x + 1.0);
                let y = r - h * u * u;
                acc += 0.5 * w * 2.0 * h * u * sigma(y).powf(beta) * g(k, y);
            }
        } else {
            for (x, w) in GL4_X.iter().zip(GL4_W) {
                let y = a + 0.5 * h * (x + 1.0);
                acc += 0.5 * h * w * sigma(y).powf(beta) * g(k, y);
            }
        }
    }
    acc
}

/// Hardy witness from samples of `F` and `F_y` on `nodes ⊂ I_b`.
pub fn hardy_check(
    profile: &EquilibriumProfile,
    k: f64,
    nodes: &[f64],
    f: &[f64],
    f_y: &[f64],
) -> Result<HardyWitness> {
    if !(k > 1.0) {
        return Err(DiagnosticsError::InvalidInput(format!("Hardy exponent must exceed 1, got {k}")));
    }
    if nodes.len() < 4 || f.len() != nodes.len() || f_y.len() != nodes.len() {
        return Err(DiagnosticsError::InvalidInput("need ≥ 4 matching samples".into()));
    }
    let lhs = weighted_integral(profile, nodes, k - 2.0, |c, y| interp(nodes, f, c, y).powi(2));
    let rhs = weighted_integral(profile, nodes, k, |c, y| {
        interp(nodes, f, c, y).powi(2) + interp(nodes, f_y, c, y).powi(2)
    });
    if !rhs.is_finite() || !lhs.is_finite() {
        return Err(DiagnosticsError::HypothesisViolated(format!(
            "non-finite integrals lhs = {lhs}, rhs = {rhs}"
        )));
    }
    let ratio = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(HardyWitness { k, lhs, rhs, ratio })
}

/// Hardy witness at `n_cells` and `2 n_cells`; fails when the right-hand
/// side or the ratio drifts by more than half under refinement.
pub fn hardy_refinement<F, Fy>(
    profile: &EquilibriumProfile,
    k: f64,
    f: F,
    f_y: Fy,
    n_cells: usize,
) -> Result<(HardyWitness, HardyWitness)>
where
    F: Fn(f64) -> f64,
    Fy: Fn(f64) -> f64,
{
    let at = |n: usize| {
        let nodes = hardy_grid(profile, n);
        let fv: Vec<f64> = nodes.iter().map(|&y| f(y)).collect();
        let fy: Vec<f64> = nodes.iter().map(|&y| f_y(y)).collect();
        hardy_check(profile, k, &nodes, &fv, &fy)
    };
    let coarse = at(n_cells)?;
    let fine = at(2 * n_cells)?;
    let drift = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
    if drift(coarse.rhs, fine.rhs) > 0.5 || drift(coarse.ratio, fine.ratio) > 0.5 {
        return Err(DiagnosticsError::HypothesisViolated(format!(
            "ratio {} -> {} under refinement",
            coarse.ratio, fine.ratio
        )));
    }
    Ok((coarse, fine))
}
