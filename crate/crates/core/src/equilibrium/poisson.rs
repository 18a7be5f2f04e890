//! Self-gravitating (Euler–Poisson) equilibria outside the core.
//!
//! The balance `A (ρ^γ)_r = -ρ (g₀ + G m(r)) / r²` with `m' = 4π r² ρ` is
//! integrated outward in the enthalpy-like variable `w = ρ^{γ-1}`:
//!
//! ```text
//! w' = -(γ-1)/(A γ) · (g₀ + G m) / r²,    m' = 4π r² w₊^{1/(γ-1)}
//! ```
//!
//! `w` is smooth through the vacuum radius, so the first zero `R_G` is
//! located by a secant search on the last step length.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{EquilibriumError, GasParameters, Result};
use crate::ode;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonOptions {
    /// Integration stops with `NoZeroFound` beyond `radius_cap_factor · r₀`.
    pub radius_cap_factor: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Longest step as a fraction of `r₀`.
    pub max_step_factor: f64,
}

impl Default for PoissonOptions {
    fn default() -> Self {
        Self {
            radius_cap_factor: 1e3,
            rtol: 1e-12,
            atol: 1e-15,
            max_step_factor: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonEquilibriumProfile {
    pub params: GasParameters,
    pub central_density: f64,
    /// First zero `R_G` of the density.
    pub first_zero_radius: f64,
    /// Adaptive radial mesh, `radii[0] = r₀`, last entry `R_G`.
    pub radii: Vec<f64>,
    pub density_samples: Vec<f64>,
    /// Enclosed gas mass `4π ∫_{r₀}^{r} ρ τ² dτ` at each node.
    pub enclosed_mass: Vec<f64>,
    /// `M' = 4π ∫_{r₀}^{R_G} ρ r² dr`.
    pub total_mass: f64,
    /// Largest one-step defect of the tabulated solution, per unit length,
    /// relative to the core-gravity scale of `w'`.
    pub max_residual: f64,
}

struct System {
    coef: f64,
    g0: f64,
    big_g: f64,
    alpha: f64,
}

impl System {
    fn rhs(&self, r: f64, y: &[f64; 2]) -> [f64; 2] {
        let w = y[0];
        let m = y[1];
        [
            -self.coef * (self.g0 + self.big_g * m) / (r * r),
            4.0 * PI * r * r * w.max(0.0).powf(self.alpha),
        ]
    }
}

/// Integrate outward from `r₀` with `ρ(r₀) = central_density`.
pub fn solve_poisson_equilibrium(
    params: &GasParameters,
    central_density: f64,
    opts: &PoissonOptions,
) -> Result<PoissonEquilibriumProfile> {
    params.validate()?;
    if 3.0 * params.gamma < 4.0 {
        return Err(EquilibriumError::InvalidParameters(
            "Euler-Poisson equilibrium requires gamma >= 4/3".into(),
        ));
    }
    if !(central_density.is_finite() && central_density > 0.0) {
        return Err(EquilibriumError::Domain {
            what: "central density",
            value: central_density,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let g = params.gamma;
    let sys = System {
        coef: (g - 1.0) / (params.pressure_const * g),
        g0: params.core_gravity,
        big_g: params.self_gravity_const,
        alpha: params.alpha(),
    };
    let f = |r: f64, y: &[f64; 2]| sys.rhs(r, y);
    let r0 = params.core_radius;
    let cap = opts.radius_cap_factor * r0;
    let h_max = opts.max_step_factor * r0;

    let mut r = r0;
    let mut y = [central_density.powf(g - 1.0), 0.0];
    let mut h = 1e-3 * r0;
    let mut radii = vec![r];
    let mut states = vec![y];

    loop {
        if r >= cap {
            return Err(EquilibriumError::NoZeroFound {
                cap,
                last_density: y[0].max(0.0).powf(sys.alpha),
            });
        }
        h = h.min(h_max).min(cap - r);
        let (y_new, err) = ode::dopri5_step(&f, r, &y, h);
        let e = ode::scaled_error(&y, &y_new, &err, opts.rtol, opts.atol);
        if e > 1.0 {
            h *= (0.9 * e.powf(-0.2)).max(0.2);
            continue;
        }
        if y_new[0] <= 0.0 {
            // The zero lies inside this step: secant on the step length.
            let (hz, yz) = locate_zero(&f, r, &y, h);
            r += hz;
            radii.push(r);
            states.push([0.0, yz[1]]);
            break;
        }
        r += h;
        y = y_new;
        radii.push(r);
        states.push(y);
        h *= (0.9 * e.max(1e-10).powf(-0.2)).min(5.0);
    }

    let scale = sys.coef * sys.g0 / (r0 * r0);
    let mut max_residual: f64 = 0.0;
    for k in 0..radii.len() - 1 {
        let h = radii[k + 1] - radii[k];
        if h <= 0.0 {
            continue;
        }
        let reference = ode::rk4_refined(&f, radii[k], &states[k], h, 32);
        let defect = (states[k + 1][0] - reference[0]).abs() / h;
        max_residual = max_residual.max(defect / scale);
    }

    let first_zero_radius = *radii.last().expect("at least two nodes");
    let total_mass = states.last().expect("nonempty")[1];
    Ok(PoissonEquilibriumProfile {
        params: *params,
        central_density,
        first_zero_radius,
        density_samples: states.iter().map(|s| s[0].max(0.0).powf(sys.alpha)).collect(),
        enclosed_mass: states.iter().map(|s| s[1]).collect(),
        radii,
        total_mass,
        max_residual,
    })
}

fn locate_zero<F>(f: &F, r: f64, y: &[f64; 2], h: f64) -> (f64, [f64; 2])
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
{
    let eval = |s: f64| ode::dopri5_step(f, r, y, s).0;
    let (mut a, mut fa) = (0.0, y[0]);
    let (mut b, mut fb) = (h, eval(h)[0]);
    let mut best = (b, eval(b));
    for _ in 0..100 {
        let mut s = b - fb * (b - a) / (fb - fa);
        if !(s > a && s < b) {
            s = 0.5 * (a + b);
        }
        let ys = eval(s);
        best = (s, ys);
        if ys[0].abs() <= 1e-15 * y[0].abs().max(1e-300) || (b - a) < 1e-16 * r {
            break;
        }
        if ys[0] > 0.0 {
            a = s;
            fa = ys[0];
        } else {
            b = s;
            fb = ys[0];
        }
    }
    best
}

impl PoissonEquilibriumProfile {
    /// ρ̄*(r) by linear interpolation in `w = ρ^{γ-1}` between nodes.
    pub fn density_at(&self, r: f64) -> f64 {
        if r <= self.radii[0] {
            return self.density_samples[0];
        }
        if r >= self.first_zero_radius {
            return 0.0;
        }
        let k = self.radii.partition_point(|&x| x <= r) - 1;
        let gm1 = self.params.gamma - 1.0;
        let w0 = self.density_samples[k].powf(gm1);
        let w1 = self.density_samples[k + 1].powf(gm1);
        let t = (r - self.radii[k]) / (self.radii[k + 1] - self.radii[k]);
        ((1.0 - t) * w0 + t * w1).max(0.0).powf(1.0 / gm1)
    }
}

/// Bisect on the central density until `M'` hits `target_mass`.
pub fn solve_poisson_for_mass(
    params: &GasParameters,
    target_mass: f64,
    opts: &PoissonOptions,
) -> Result<PoissonEquilibriumProfile> {
    if !(target_mass.is_finite() && target_mass > 0.0) {
        return Err(EquilibriumError::Domain {
            what: "target mass",
            value: target_mass,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let mass = |rho_c: f64| solve_poisson_equilibrium(params, rho_c, opts).map(|p| p.total_mass);
    let mut lo = 1e-6;
    while mass(lo)? > target_mass {
        lo *= 0.1;
        if lo < 1e-200 {
            return Err(EquilibriumError::NonConvergence("mass target below reach".into()));
        }
    }
    let mut hi = lo;
    loop {
        hi *= 2.0;
        match mass(hi) {
            Ok(m) if m >= target_mass => break,
            Ok(_) => lo = hi,
            Err(e) => return Err(e),
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = solve_poisson_equilibrium(params, mid, opts)?;
        if (p.total_mass - target_mass).abs() <= 1e-10 * target_mass || hi - lo <= 1e-15 * hi {
            return Ok(p);
        }
        if p.total_mass < target_mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(EquilibriumError::NonConvergence("central-density bisection".into()))
}
