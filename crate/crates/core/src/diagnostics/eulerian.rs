use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{fit_decay_rate, DecayFit, DiagnosticsError, Result};
use crate::solver::{cubic_cell_weights, fornberg, SimState, Trajectory};

/// Physical-space fields reconstructed from the flow map `η = y(1+ζ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerianFields {
    pub radii: Vec<f64>,
    pub density: Vec<f64>,
    pub velocity: Vec<f64>,
    pub boundary_radius: f64,
}

pub fn eulerian_reconstruct(state: &SimState) -> Result<EulerianFields> {
    let y = state.nodes();
    let jac = state.jacobian();
    if let Some((node, &value)) = jac.iter().enumerate().find(|(_, j)| !(**j > 0.0)) {
        return Err(DiagnosticsError::JacobianDegenerate { node, value });
    }
    let rho_bar = state.model.density();
    let radii: Vec<f64> = y.iter().zip(&state.zeta).map(|(y, z)| y * (1.0 + z)).collect();
    if let Some(node) = radii.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(DiagnosticsError::JacobianDegenerate {
            node: node + 1,
            value: radii[node + 1] - radii[node],
        });
    }
    let density = rho_bar.iter().zip(&jac).map(|(r, j)| r / j).collect();
    let velocity = y.iter().zip(&state.zeta_t).map(|(y, v)| y * v).collect();
    let boundary_radius = *radii.last().expect("nonempty grid");
    Ok(EulerianFields {
        radii,
        density,
        velocity,
        boundary_radius,
    })
}

/// `4π ∫ ρ r² dr` over the reconstructed radii.
pub fn reconstructed_mass(fields: &EulerianFields) -> f64 {
    let w = cubic_cell_weights(&fields.radii);
    4.0 * PI
        * w.iter()
            .zip(&fields.radii)
            .zip(&fields.density)
            .map(|((w, r), d)| w * d * r * r)
            .sum::<f64>()
}

/// One-sided slope of `ρ^{γ-1}` in `r` at the moving boundary.
pub fn vacuum_slope(state: &SimState) -> Result<f64> {
    let fields = eulerian_reconstruct(state)?;
    let gm1 = state.profile().gamma() - 1.0;
    let n = fields.radii.len();
    let r = &fields.radii[n - 5..];
    let h: Vec<f64> = fields.density[n - 5..].iter().map(|d| d.powf(gm1)).collect();
    let c = fornberg(fields.boundary_radius, r, 1);
    Ok(c[1].iter().zip(&h).map(|(w, v)| w * v).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseDecay {
    /// Fit of `max_y |u|`; `None` when the series is identically zero.
    pub velocity: Option<DecayFit>,
    /// Fit of `|R(t) - R|`; `None` when identically zero.
    pub boundary: Option<DecayFit>,
    /// True when both series vanish and no fit was attempted.
    pub zero_flag: bool,
    /// Raw `(t, max|u|, |R(t) - R|)` samples.
    pub series: Vec<(f64, f64, f64)>,
}

/// Running envelope `sup_{s ≥ t} |f(s)|` over the sampled series.
fn forward_envelope(series: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = series.to_vec();
    let mut running: f64 = 0.0;
    for p in out.iter_mut().rev() {
        running = running.max(p.1.abs());
        p.1 = running;
    }
    out
}

/// Exponential fits of the sup-norm of the velocity and of the boundary
/// displacement. Both are fitted through their forward envelope
/// `sup_{s ≥ t}`, which is what a pointwise exponential bound controls.
pub fn pointwise_decay_check(trajectory: &Trajectory, window: [f64; 2]) -> Result<PointwiseDecay> {
    let mut series = Vec::with_capacity(trajectory.len());
    for s in &trajectory.states {
        let big_r = s.profile().outer_radius();
        let y = s.nodes();
        let umax = y
            .iter()
            .zip(&s.zeta_t)
            .map(|(y, v)| (y * v).abs())
            .fold(0.0, f64::max);
        let disp = (big_r * s.zeta.last().copied().unwrap_or(0.0)).abs();
        series.push((s.time, umax, disp));
    }
    let u: Vec<(f64, f64)> = series.iter().map(|p| (p.0, p.1)).collect();
    let b: Vec<(f64, f64)> = series.iter().map(|p| (p.0, p.2)).collect();
    let all_zero = |v: &[(f64, f64)]| v.iter().all(|p| p.1 == 0.0);
    let fit = |v: &[(f64, f64)]| -> Result<Option<DecayFit>> {
        if all_zero(v) {
            Ok(None)
        } else {
            fit_decay_rate(&forward_envelope(v), window).map(Some)
        }
    };
    let velocity = fit(&u)?;
    let boundary = fit(&b)?;
    Ok(PointwiseDecay {
        zero_flag: velocity.is_none() && boundary.is_none(),
        velocity,
        boundary,
        series,
    })
}
