use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, Result};
use crate::solver::{acceleration, spatial_operator, SimState, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConfig {
    /// Highest temporal order `j` of `E_j`.
    pub j_max: usize,
    /// `E_{j,i}` are computed for `j + i ≤ order_cap`.
    pub order_cap: usize,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self { j_max: 2, order_cap: 3 }
    }
}

/// All weighted functionals of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub time: f64,
    /// `E_j`, `j = 0..=j_max`.
    pub e_j: Vec<f64>,
    /// `e_ji[j][i-1] = E_{j,i}` for `1 ≤ i ≤ order_cap - j`.
    pub e_ji: Vec<Vec<f64>>,
    /// `D_j`, `j = 0..=j_max`.
    pub d_j: Vec<f64>,
    /// `Σ_j (E_j + Σ_i E_{j,i})`.
    pub total: f64,
    pub j_max: usize,
    /// `4 + ⌊α⌋`, recorded for reference only.
    pub energy_order: usize,
}

impl EnergyReport {
    pub fn get_ji(&self, j: usize, i: usize) -> Option<f64> {
        if i == 0 {
            return None;
        }
        self.e_ji.get(j).and_then(|row| row.get(i - 1)).copied()
    }
}

/// `[ζ, ζ_t, ζ_tt, ζ_ttt]` at every node.
///
/// `ζ_ttt = -ζ_tt + N'(ζ)[ζ_t]`, with the directional derivative of the
/// spatial operator taken by a central difference along `ζ_t`.
pub fn time_derivatives(state: &SimState) -> Result<[Vec<f64>; 4]> {
    let mut d = derivatives_up_to(state, 3)?;
    let zttt = d.pop().expect("four entries");
    let ztt = d.pop().expect("three entries");
    Ok([state.zeta.clone(), state.zeta_t.clone(), ztt, zttt])
}

/// `∂_t^j ζ` for `j = 0..=order`, computing only what is asked for.
fn derivatives_up_to(state: &SimState, order: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![state.zeta.clone(), state.zeta_t.clone()];
    if order >= 2 {
        out.push(acceleration(state)?);
    }
    if order >= 3 {
        let n = state.zeta.len();
        let tau = 1e-3;
        let shifted = |sign: f64| -> Vec<f64> {
            (0..n).map(|k| state.zeta[k] + sign * tau * state.zeta_t[k]).collect()
        };
        let np = spatial_operator(&state.model, &shifted(1.0), state.gravity_enabled)?;
        let nm = spatial_operator(&state.model, &shifted(-1.0), state.gravity_enabled)?;
        let ztt = &out[2];
        let mut zttt: Vec<f64> = (0..n).map(|k| -ztt[k] + (np[k] - nm[k]) / (2.0 * tau)).collect();
        zttt[0] = 0.0;
        out.push(zttt);
    }
    out.truncate(order + 1);
    Ok(out)
}

struct Weights {
    /// `y⁴ σ^α`
    w4a: Vec<f64>,
    /// `y² σ^{α+1}`
    w2a1: Vec<f64>,
}

fn weights(state: &SimState) -> Weights {
    let alpha = state.profile().alpha();
    let y = state.nodes();
    let sigma = state.model.sigma();
    let w4a = y.iter().zip(sigma).map(|(y, s)| y.powi(4) * s.powf(alpha)).collect();
    let w2a1 = y.iter().zip(sigma).map(|(y, s)| y * y * s.powf(alpha + 1.0)).collect();
    Weights { w4a, w2a1 }
}

fn e_j_from(state: &SimState, w: &Weights, t: &[Vec<f64>], j: usize) -> f64 {
    let grid = &state.model.grid;
    let y = grid.nodes();
    let dy = grid.d1().apply(&t[j]);
    let f: Vec<f64> = (0..y.len())
        .map(|k| {
            w.w4a[k] * (t[j][k].powi(2) + t[j + 1][k].powi(2))
                + w.w2a1[k] * (t[j][k].powi(2) + (y[k] * dy[k]).powi(2))
        })
        .collect();
    grid.integrate(&f)
}

fn d_j_from(state: &SimState, w: &Weights, t: &[Vec<f64>], j: usize) -> f64 {
    let grid = &state.model.grid;
    let y = grid.nodes();
    let dy = grid.d1().apply(&t[j]);
    let f: Vec<f64> = (0..y.len())
        .map(|k| {
            w.w4a[k] * t[j + 1][k].powi(2) + w.w2a1[k] * (t[j][k].powi(2) + (y[k] * dy[k]).powi(2))
        })
        .collect();
    grid.integrate(&f)
}

/// `∂_y^i f` for `i ≤ 4` by repeated first/second-derivative stencils.
fn space_derivative(state: &SimState, f: &[f64], i: usize) -> Vec<f64> {
    let g = &state.model.grid;
    match i {
        0 => f.to_vec(),
        1 => g.d1().apply(f),
        2 => g.d2().apply(f),
        3 => g.d1().apply(&g.d2().apply(f)),
        4 => g.d2().apply(&g.d2().apply(f)),
        _ => unreachable!("derivative order checked by caller"),
    }
}

fn e_ji_from(state: &SimState, field: &[f64], i: usize) -> f64 {
    let alpha = state.profile().alpha();
    let grid = &state.model.grid;
    let y = grid.nodes();
    let sigma = state.model.sigma();
    let di = space_derivative(state, field, i);
    let di1 = space_derivative(state, field, i + 1);
    let a = alpha + i as f64;
    let f: Vec<f64> = (0..y.len())
        .map(|k| {
            y[k] * y[k] * sigma[k].powf(a - 1.0) * di[k].powi(2)
                + y[k].powi(4) * sigma[k].powf(a + 1.0) * di1[k].powi(2)
        })
        .collect();
    grid.integrate(&f)
}

/// `E_j(t)` for `j ≤ 2`.
pub fn energy_j(state: &SimState, j: usize) -> Result<f64> {
    if j > 2 {
        return Err(DiagnosticsError::OrderUnavailable { j, i: 0 });
    }
    let t = derivatives_up_to(state, j + 1)?;
    Ok(e_j_from(state, &weights(state), &t, j))
}

/// `E_{j,i}(t)` for `1 ≤ i`, `j + i ≤ 3`.
pub fn energy_ji(state: &SimState, j: usize, i: usize) -> Result<f64> {
    if i == 0 || j + i > 3 || j > 2 {
        return Err(DiagnosticsError::OrderUnavailable { j, i });
    }
    let t = derivatives_up_to(state, j)?;
    Ok(e_ji_from(state, &t[j], i))
}

pub fn energy_report(state: &SimState) -> Result<EnergyReport> {
    energy_report_with(state, &EnergyConfig::default())
}

pub fn energy_report_with(state: &SimState, cfg: &EnergyConfig) -> Result<EnergyReport> {
    if cfg.j_max > 2 {
        return Err(DiagnosticsError::OrderUnavailable { j: cfg.j_max, i: 0 });
    }
    if cfg.order_cap > 3 {
        return Err(DiagnosticsError::OrderUnavailable { j: 0, i: cfg.order_cap });
    }
    let t = derivatives_up_to(state, cfg.j_max + 1)?;
    let w = weights(state);
    let e_j: Vec<f64> = (0..=cfg.j_max).map(|j| e_j_from(state, &w, &t, j)).collect();
    let d_j: Vec<f64> = (0..=cfg.j_max).map(|j| d_j_from(state, &w, &t, j)).collect();
    let e_ji: Vec<Vec<f64>> = (0..=cfg.j_max)
        .map(|j| {
            (1..=cfg.order_cap.saturating_sub(j))
                .map(|i| e_ji_from(state, &t[j], i))
                .collect()
        })
        .collect();
    let total = e_j.iter().sum::<f64>() + e_ji.iter().flatten().sum::<f64>();
    Ok(EnergyReport {
        time: state.time,
        e_j,
        e_ji,
        d_j,
        total,
        j_max: cfg.j_max,
        energy_order: state.profile().params().energy_order(),
    })
}

/// Running witness of `E_{0,1} ≲ E_0 + E_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticRatio {
    /// `(t, E_{0,1} / (E_0 + E_1))` where the denominator is usable.
    pub samples: Vec<(f64, f64)>,
    pub max_ratio: Option<f64>,
}

pub fn elliptic_ratio(trajectory: &Trajectory) -> EllipticRatio {
    let samples: Vec<(f64, f64)> = trajectory
        .reports
        .iter()
        .filter_map(|r| {
            let den = r.e_j.first()? + r.e_j.get(1)?;
            let num = r.get_ji(0, 1)?;
            (den > 1e-300).then(|| (r.time, num / den))
        })
        .collect();
    let max_ratio = samples.iter().map(|s| s.1).fold(None, |m: Option<f64>, v| {
        Some(m.map_or(v, |m| m.max(v)))
    });
    EllipticRatio { samples, max_ratio }
}
