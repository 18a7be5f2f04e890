use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, Result};

/// Least-squares fit of `ln E = intercept - δ (t - t_lo)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub delta_hat: f64,
    /// Fitted `ln E` at the window start.
    pub intercept: f64,
    pub r_squared: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

const MIN_SAMPLES: usize = 10;

pub fn fit_decay_rate(series: &[(f64, f64)], window: [f64; 2]) -> Result<DecayFit> {
    let [lo, hi] = window;
    if !(lo < hi) {
        return Err(DiagnosticsError::InvalidWindow { lo, hi });
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= lo - 1e-12 && *t <= hi + 1e-12)
        .collect();
    if pts.len() < MIN_SAMPLES {
        return Err(DiagnosticsError::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: pts.len(),
        });
    }
    if let Some(&(time, value)) = pts.iter().find(|(_, e)| !(*e > 0.0)) {
        return Err(DiagnosticsError::NonpositiveEnergy { time, value });
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0 - lo).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy <= 1e-30 * (my * my).max(1.0) {
        0.0
    } else {
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let delta_hat = if syy <= 1e-30 * (my * my).max(1.0) { 0.0 } else { -slope };
    Ok(DecayFit {
        delta_hat,
        intercept,
        r_squared,
        window,
        samples: pts.len(),
    })
}
