//! Closed-form equilibria of the damped Euler system with a solid core.
//!
//! A static atmosphere balances pressure against the core's gravity,
//! `A (ρ^γ)_r = -g₀ ρ / r²`, which integrates to
//! `ρ̄(r) = Ā (1/r - 1/R)^{1/(γ-1)}` on `[r₀, R)`. The outer radius `R` is a
//! free parameter fixed by the total mass.

mod poisson;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature;

pub use poisson::{
    solve_poisson_equilibrium, solve_poisson_for_mass, PoissonEquilibriumProfile, PoissonOptions,
};

/// Relative tolerance for the mass integral.
pub const MASS_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error("invalid gas parameters: {0}")]
    InvalidParameters(String),
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("target mass {target} is not below the threshold M* = {threshold}")]
    MassExceedsThreshold { target: f64, threshold: f64 },
    #[error("root finding did not converge: {0}")]
    NonConvergence(String),
    #[error("density has no zero below the radius cap {cap} (reached density {last_density})")]
    NoZeroFound { cap: f64, last_density: f64 },
}

pub type Result<T> = std::result::Result<T, EquilibriumError>;

/// Physical constants of the gas and the core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParameters {
    /// Adiabatic exponent γ.
    pub gamma: f64,
    /// `A` in `p = A ρ^γ`.
    pub pressure_const: f64,
    /// `g₀ = G₀ M₀`, the core's gravitational parameter.
    pub core_gravity: f64,
    /// Core radius `r₀`.
    pub core_radius: f64,
    /// Gravitational constant of the atmosphere; zero disables self-gravity.
    pub self_gravity_const: f64,
}

impl GasParameters {
    pub fn new(gamma: f64, pressure_const: f64, core_gravity: f64, core_radius: f64) -> Result<Self> {
        let p = Self {
            gamma,
            pressure_const,
            core_gravity,
            core_radius,
            self_gravity_const: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_self_gravity(mut self, g: f64) -> Result<Self> {
        self.self_gravity_const = g;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(EquilibriumError::InvalidParameters(m.to_string()));
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return bad("gamma must exceed 1");
        }
        if !(self.pressure_const.is_finite() && self.pressure_const > 0.0) {
            return bad("pressure_const must be positive");
        }
        if !(self.core_gravity.is_finite() && self.core_gravity > 0.0) {
            return bad("core_gravity must be positive");
        }
        if !(self.core_radius.is_finite() && self.core_radius > 0.0) {
            return bad("core_radius must be positive");
        }
        if !(self.self_gravity_const.is_finite() && self.self_gravity_const >= 0.0) {
            return bad("self_gravity_const must be nonnegative");
        }
        Ok(())
    }

    /// `α = 1/(γ-1)`.
    pub fn alpha(&self) -> f64 {
        1.0 / (self.gamma - 1.0)
    }

    /// Order `n = 4 + ⌊α⌋` of the full energy ladder.
    pub fn energy_order(&self) -> usize {
        4 + self.alpha().floor() as usize
    }

    /// Mass threshold `M*` for γ < 4/3; `+∞` otherwise.
    pub fn mass_star(&self) -> f64 {
        let g = self.gamma;
        if 3.0 * g >= 4.0 {
            return f64::INFINITY;
        }
        let abar = compute_abar(self);
        4.0 * PI * abar * (g - 1.0) / (4.0 - 3.0 * g)
            * self.core_radius.powf(-(4.0 - 3.0 * g) / (g - 1.0))
    }
}

/// `Ā = ((γ-1) g₀ / (γ A))^{1/(γ-1)}`.
pub fn compute_abar(params: &GasParameters) -> f64 {
    let g = params.gamma;
    ((g - 1.0) * params.core_gravity / (g * params.pressure_const)).powf(1.0 / (g - 1.0))
}

/// Closed-form equilibrium with free radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumProfile {
    params: GasParameters,
    outer_radius: f64,
    abar: f64,
    alpha: f64,
    total_mass: f64,
    mass_star: f64,
}

impl EquilibriumProfile {
    pub fn new(params: GasParameters, outer_radius: f64) -> Result<Self> {
        params.validate()?;
        if !(outer_radius.is_finite() && outer_radius > params.core_radius) {
            return Err(EquilibriumError::Domain {
                what: "outer radius",
                value: outer_radius,
                lo: params.core_radius,
                hi: f64::INFINITY,
            });
        }
        let abar = compute_abar(&params);
        let alpha = params.alpha();
        let total_mass = mass_for_radius(&params, abar, outer_radius);
        Ok(Self {
            params,
            outer_radius,
            abar,
            alpha,
            total_mass,
            mass_star: params.mass_star(),
        })
    }

    pub fn params(&self) -> &GasParameters {
        &self.params
    }
    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }
    pub fn core_radius(&self) -> f64 {
        self.params.core_radius
    }
    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }
    pub fn abar(&self) -> f64 {
        self.abar
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
    pub fn mass_star(&self) -> f64 {
        self.mass_star
    }

    /// `Ā^{γ-1}`, the magnitude of `y² σ_y`.
    pub fn sigma_scale(&self) -> f64 {
        self.abar.powf(self.params.gamma - 1.0)
    }

    /// ρ̄(r) for `r ≥ r₀`.
    pub fn density(&self, r: f64) -> Result<f64> {
        if !(r >= self.params.core_radius) {
            return Err(EquilibriumError::Domain {
                what: "r",
                value: r,
                lo: self.params.core_radius,
                hi: f64::INFINITY,
            });
        }
        Ok(self.density_unchecked(r))
    }

    pub(crate) fn density_unchecked(&self, r: f64) -> f64 {
        if r >= self.outer_radius {
            return 0.0;
        }
        self.abar * (1.0 / r - 1.0 / self.outer_radius).powf(self.alpha)
    }

    /// `(σ(y), σ_y(y))` with `σ = ρ̄^{γ-1}`.
    pub fn sigma_and_slope(&self, y: f64) -> Result<(f64, f64)> {
        if !(y >= self.params.core_radius && y <= self.outer_radius) {
            return Err(EquilibriumError::Domain {
                what: "y",
                value: y,
                lo: self.params.core_radius,
                hi: self.outer_radius,
            });
        }
        Ok(self.sigma_and_slope_unchecked(y))
    }

    pub(crate) fn sigma_and_slope_unchecked(&self, y: f64) -> (f64, f64) {
        let s = self.sigma_scale();
        let r = self.outer_radius;
        (s * ((r - y) / (y * r)).max(0.0), -s / (y * y))
    }

    /// Maximum of `|A (ρ̄^γ)_r + g₀ ρ̄ / r²|` over `mesh`, relative to the
    /// gravity scale `g₀ ρ̄ / r²` at each node.
    ///
    /// `(ρ̄^γ)_r` is taken from the closed form: with `s = 1/r - 1/R`,
    /// `ρ̄^γ = Ā^γ s^{γα}` and `d/dr = -Ā^γ γα s^{γα-1} / r²`.
    pub fn residual(&self, mesh: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &r in mesh {
            if !(r > self.params.core_radius && r < self.outer_radius) {
                return Err(EquilibriumError::Domain {
                    what: "mesh node",
                    value: r,
                    lo: self.params.core_radius,
                    hi: self.outer_radius,
                });
            }
            let g = self.params.gamma;
            let s = 1.0 / r - 1.0 / self.outer_radius;
            let rho = self.abar * s.powf(self.alpha);
            let dp = -self.abar.powf(g) * g * self.alpha * s.powf(g * self.alpha - 1.0) / (r * r);
            let grav = self.params.core_gravity * rho / (r * r);
            let res = (self.params.pressure_const * dp + grav).abs() / grav;
            worst = worst.max(res);
        }
        Ok(worst)
    }

    /// Same profile with Ā replaced (for detuning checks).
    pub fn with_abar(mut self, abar: f64) -> Self {
        self.abar = abar;
        self
    }

    /// Enclosed mass `4π ∫_{r₀}^{r} ρ̄ τ² dτ`.
    pub fn enclosed_mass(&self, r: f64) -> f64 {
        let r = r.min(self.outer_radius);
        if r <= self.params.core_radius {
            return 0.0;
        }
        let abar = self.abar;
        let big_r = self.outer_radius;
        let alpha = self.alpha;
        4.0 * PI
            * abar
            * quadrature::integrate(
                |t| (1.0 / t - 1.0 / big_r).max(0.0).powf(alpha) * t * t,
                self.params.core_radius,
                r,
                MASS_REL_TOL,
            )
    }
}

fn mass_for_radius(params: &GasParameters, abar: f64, big_r: f64) -> f64 {
    let alpha = params.alpha();
    4.0 * PI
        * abar
        * quadrature::integrate(
            |r| (1.0 / r - 1.0 / big_r).max(0.0).powf(alpha) * r * r,
            params.core_radius,
            big_r,
            MASS_REL_TOL,
        )
}

/// Total mass `M(R)` of the closed-form equilibrium.
pub fn total_mass(profile: &EquilibriumProfile) -> f64 {
    profile.total_mass
}

/// Invert the strictly increasing mass–radius relation.
pub fn radius_from_mass(params: &GasParameters, target_mass: f64) -> Result<EquilibriumProfile> {
    params.validate()?;
    if !(target_mass.is_finite() && target_mass > 0.0) {
        return Err(EquilibriumError::Domain {
            what: "target mass",
            value: target_mass,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let m_star = params.mass_star();
    if target_mass >= m_star {
        return Err(EquilibriumError::MassExceedsThreshold {
            target: target_mass,
            threshold: m_star,
        });
    }
    let abar = compute_abar(params);
    let r0 = params.core_radius;
    let f = |r: f64| mass_for_radius(params, abar, r) - target_mass;

    let mut lo = r0 * (1.0 + 1e-9);
    let mut f_lo = f(lo);
    if f_lo >= 0.0 {
        return EquilibriumProfile::new(*params, lo);
    }
    let mut hi = 2.0 * r0;
    let mut f_hi = f(hi);
    let mut doublings = 0;
    while f_hi < 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi);
        doublings += 1;
        if doublings > 200 || !f_hi.is_finite() {
            return Err(EquilibriumError::NonConvergence(format!(
                "could not bracket mass {target_mass} (last R = {hi})"
            )));
        }
    }

    // Secant with bisection fallback; the bracket always shrinks.
    let tol = 1e-10 * target_mass;
    for _ in 0..200 {
        let mut x = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let mid = 0.5 * (lo + hi);
        if !(x > lo && x < hi) || (x - mid).abs() > 0.45 * (hi - lo) {
            x = mid;
        }
        let fx = f(x);
        if fx.abs() <= tol || (hi - lo) <= 1e-15 * hi {
            return EquilibriumProfile::new(*params, x);
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
    }
    Err(EquilibriumError::NonConvergence(format!(
        "no convergence after 200 iterations, bracket [{lo}, {hi}]"
    )))
}

/// Outcome of checking `r₀ < R ≤ 4 r₀ / (3 - α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowCheck {
    pub pass: bool,
    /// `4 r₀/(3-α) - R`; `+∞` when the upper bound is vacuous.
    pub margin: f64,
    pub note: Option<String>,
}

pub fn check_radius_window(profile: &EquilibriumProfile) -> WindowCheck {
    check_radius(profile.params(), profile.outer_radius())
}

/// Window check for a bare radius (no profile needed, so `R ≤ r₀` can be
/// reported as a failure instead of a construction error).
pub fn check_radius(params: &GasParameters, outer_radius: f64) -> WindowCheck {
    let r0 = params.core_radius;
    let r = outer_radius;
    let upper = window_upper(params);
    if upper.is_infinite() {
        return WindowCheck {
            pass: r > r0,
            margin: f64::INFINITY,
            note: Some("gamma <= 4/3: upper radius bound is vacuous".into()),
        };
    }
    WindowCheck {
        pass: r > r0 && r <= upper,
        margin: upper - r,
        note: None,
    }
}

/// Upper end `4 r₀/(3-α)` of the radius window (∞ for γ ≤ 4/3).
pub fn window_upper(params: &GasParameters) -> f64 {
    let alpha = params.alpha();
    if alpha >= 3.0 {
        f64::INFINITY
    } else {
        4.0 * params.core_radius / (3.0 - alpha)
    }
}

#[cfg(test)]
mod tests;
