use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::equilibrium::{EquilibriumProfile, GasParameters};
use crate::solver::{
    apply_perturbation, build_grid, evolve, Model, Perturbation, PerturbationKind, SimState,
    SolverOptions,
};

/// γ = 2, A = 1, g₀ = 2 (so Ā = 1), r₀ = 1, R = 2: σ = 1/y - 1/2, α = 1.
fn unit_profile() -> EquilibriumProfile {
    EquilibriumProfile::new(GasParameters::new(2.0, 1.0, 2.0, 1.0).unwrap(), 2.0).unwrap()
}

fn reference() -> EquilibriumProfile {
    EquilibriumProfile::new(GasParameters::new(5.0 / 3.0, 1.0, 1.0, 1.0).unwrap(), 2.5).unwrap()
}

fn state(prof: EquilibriumProfile, n: usize) -> SimState {
    let grid = build_grid(&prof, n, 2.0).unwrap();
    SimState::equilibrium(Arc::new(Model::new(prof, grid, SolverOptions::default())))
}

fn with_fields(mut s: SimState, zeta: impl Fn(f64) -> f64, zeta_t: impl Fn(f64) -> f64) -> SimState {
    s.zeta = s.nodes().iter().map(|&y| zeta(y)).collect();
    s.zeta_t = s.nodes().iter().map(|&y| zeta_t(y)).collect();
    s
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

// ---------- energies ----------

#[test]
fn zero_state_has_zero_energy() {
    let s = state(reference(), 64);
    let r = energy_report(&s).unwrap();
    assert!(r.e_j.iter().chain(r.d_j.iter()).chain(r.e_ji.iter().flatten()).all(|v| *v == 0.0));
    assert_eq!(r.total, 0.0);
}

#[test]
fn e0_of_constant_field_closed_form() {
    // c² ∫₁² (y⁴σ + y²σ²) dy = 11/15 c²
    for c in [1e-3, 0.02] {
        let s = with_fields(state(unit_profile(), 256), |_| c, |_| 0.0);
        let e0 = energy_j(&s, 0).unwrap();
        assert!(rel(e0, c * c * 11.0 / 15.0) < 1e-6, "{e0}");
    }
}

#[test]
fn constant_field_has_no_spatial_energy() {
    let s = with_fields(state(unit_profile(), 128), |_| 0.01, |_| 0.0);
    for i in 1..=3 {
        assert!(energy_ji(&s, 0, i).unwrap() < 1e-20);
    }
}

#[test]
fn e0_is_exactly_quadratic() {
    let base = with_fields(
        state(reference(), 64),
        |y| 1e-3 * (y - 1.0).powi(3) * (3.0 - y),
        |y| 2e-3 * (y - 1.0).powi(3),
    );
    let e = energy_j(&base, 0).unwrap();
    for lam in [2.0, -3.0, 0.1] {
        let mut s = base.clone();
        s.zeta.iter_mut().chain(s.zeta_t.iter_mut()).for_each(|v| *v *= lam);
        assert!(rel(energy_j(&s, 0).unwrap(), lam * lam * e) < 1e-13);
    }
}

#[test]
fn smooth_field_energies_match_oracle() {
    // ζ = (y - 1)(2 - y) on the unit profile; oracle by exact integration.
    let s = with_fields(state(unit_profile(), 256), |y| (y - 1.0) * (2.0 - y), |_| 0.0);
    assert!(rel(energy_j(&s, 0).unwrap(), 0.070634920634920634921) < 1e-6);
    assert!(rel(energy_ji(&s, 0, 1).unwrap(), 0.25) < 1e-6);
    // ζ_yy = -2, ζ_yyy = 0: E_{0,2} = 4 ∫ y²σ² dy = 1/3
    assert!(rel(energy_ji(&s, 0, 2).unwrap(), 1.0 / 3.0) < 1e-6);
}

#[test]
fn energy_orders_are_capped() {
    let s = state(reference(), 32);
    assert!(matches!(energy_j(&s, 3), Err(DiagnosticsError::OrderUnavailable { j: 3, .. })));
    assert!(matches!(energy_ji(&s, 1, 3), Err(DiagnosticsError::OrderUnavailable { .. })));
    assert!(matches!(energy_ji(&s, 0, 0), Err(DiagnosticsError::OrderUnavailable { .. })));
    let cfg = EnergyConfig { j_max: 3, order_cap: 3 };
    assert!(energy_report_with(&s, &cfg).is_err());
}

#[test]
fn report_layout_and_invariants() {
    let s = apply_perturbation(
        &state(reference(), 64),
        &Perturbation::new(1, 1e-3, PerturbationKind::Displacement),
    )
    .unwrap();
    let r = energy_report(&s).unwrap();
    assert_eq!(r.e_j.len(), 3);
    assert_eq!(r.d_j.len(), 3);
    assert_eq!(r.e_ji.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 2, 1]);
    assert_eq!(r.energy_order, 5);
    assert!(r.e_j.iter().chain(r.d_j.iter()).chain(r.e_ji.iter().flatten()).all(|v| *v >= 0.0));
    assert!(r.total >= r.e_j[0]);
    let sum = r.e_j.iter().sum::<f64>() + r.e_ji.iter().flatten().sum::<f64>();
    assert!(rel(r.total, sum) < 1e-15);
    assert_eq!(r.get_ji(0, 1), Some(r.e_ji[0][0]));
    assert_eq!(r.get_ji(2, 2), None);
    let p = GasParameters::new(1.4, 1.0, 1.0, 1.0).unwrap();
    assert_eq!(p.energy_order(), 6);
}

#[test]
fn energies_converge_under_refinement() {
    let f = |n| {
        let s = with_fields(state(reference(), n), |y| 1e-3 * (y - 1.0).powi(3), |y| (y - 1.0).powi(4));
        energy_report(&s).unwrap()
    };
    let (a, b) = (f(128), f(1280));
    assert!(rel(a.e_j[0], b.e_j[0]) < 1e-5);
    assert!(rel(a.e_ji[0][0], b.e_ji[0][0]) < 1e-5);
    assert!(rel(a.d_j[0], b.d_j[0]) < 1e-5);
}

/// The total energy is a sum of weighted norms, not a Lyapunov functional:
/// between close snapshots it can rise while energy moves between modes.
/// Over one damping time it always drops.
#[test]
fn total_energy_decreases_over_unit_time() {
    let s = apply_perturbation(
        &state(reference(), 64),
        &Perturbation::new(1, 1e-3, PerturbationKind::Displacement),
    )
    .unwrap();
    let traj = evolve(&s, 10.0, 0.25).unwrap();
    let e = traj.energy_series();
    for w in e.windows(5).filter(|w| w[0].0 > 1.0) {
        assert!(w[4].1 < w[0].1, "E rises from {:?} to {:?}", w[0], w[4]);
    }
}

#[test]
fn elliptic_ratio_on_equilibrium_is_empty() {
    let traj = evolve(&state(reference(), 32), 2.0, 0.5).unwrap();
    let er = elliptic_ratio(&traj);
    assert!(er.samples.is_empty());
    assert_eq!(er.max_ratio, None);
}

// ---------- fits ----------

fn series(f: impl Fn(f64) -> f64, dt: f64, t_end: f64) -> Vec<(f64, f64)> {
    let n = (t_end / dt).round() as usize;
    (0..=n).map(|k| k as f64 * dt).map(|t| (t, f(t))).collect()
}

#[test]
fn fit_exact_exponential() {
    let fit = fit_decay_rate(&series(|t| (-0.5 * t).exp(), 0.5, 10.0), [0.0, 10.0]).unwrap();
    assert!((fit.delta_hat - 0.5).abs() < 1e-12);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    assert_eq!(fit.samples, 21);
}

#[test]
fn fit_noisy_exponential() {
    let s = series(|t| 3.0 * (-1.2 * t).exp() * (1.0 + 0.01 * (7.0 * t).sin()), 0.1, 10.0);
    let fit = fit_decay_rate(&s, [0.0, 10.0]).unwrap();
    assert!((fit.delta_hat - 1.2).abs() <= 0.02);
    assert!((fit.intercept - 3f64.ln()).abs() < 0.02);
}

#[test]
fn fit_constant_series_convention() {
    let fit = fit_decay_rate(&series(|_| 2.5, 1.0, 20.0), [0.0, 20.0]).unwrap();
    assert_eq!(fit.delta_hat, 0.0);
    assert_eq!(fit.r_squared, 0.0);
}

#[test]
fn fit_errors() {
    let s = series(|t| (-t).exp(), 1.0, 20.0);
    assert!(matches!(
        fit_decay_rate(&s, [0.0, 5.0]),
        Err(DiagnosticsError::InsufficientSamples { needed: 10, got: 6 })
    ));
    assert!(matches!(fit_decay_rate(&s, [5.0, 5.0]), Err(DiagnosticsError::InvalidWindow { .. })));
    let mut bad = s.clone();
    bad[7].1 = 0.0;
    assert!(matches!(
        fit_decay_rate(&bad, [0.0, 20.0]),
        Err(DiagnosticsError::NonpositiveEnergy { .. })
    ));
}

// ---------- Eulerian picture ----------

#[test]
fn eulerian_equilibrium_identity() {
    let prof = reference();
    let s = state(prof, 64);
    let f = eulerian_reconstruct(&s).unwrap();
    assert_eq!(f.boundary_radius, 2.5);
    assert_eq!(f.radii, s.nodes());
    assert!(f.velocity.iter().all(|u| *u == 0.0));
    for (r, d) in f.radii.iter().zip(&f.density) {
        assert_eq!(*d, prof.density(*r).unwrap());
    }
    assert_eq!(*f.density.last().unwrap(), 0.0);
}

#[test]
fn eulerian_constant_dilation() {
    let prof = reference();
    let c = 0.01;
    let s = with_fields(state(prof, 64), |_| c, |_| 0.0);
    let f = eulerian_reconstruct(&s).unwrap();
    assert!((f.boundary_radius - 2.5 * (1.0 + c)).abs() < 1e-15);
    for (y, d) in s.nodes().iter().zip(&f.density) {
        let expect = prof.density(*y).unwrap() / (1.0 + c).powi(3);
        assert!((d - expect).abs() <= 1e-14 * expect.max(1e-300));
    }
}

#[test]
fn reconstructed_mass_matches_profile() {
    let prof = reference();
    let s = apply_perturbation(
        &state(prof, 256),
        &Perturbation::new(2, 1e-2, PerturbationKind::Displacement),
    )
    .unwrap();
    let m = reconstructed_mass(&eulerian_reconstruct(&s).unwrap());
    assert!(rel(m, prof.total_mass()) < 1e-6, "{m} vs {}", prof.total_mass());
}

#[test]
fn eulerian_rejects_folded_state() {
    let mut s = state(reference(), 32);
    s.zeta[10] = 0.5;
    assert!(matches!(
        eulerian_reconstruct(&s),
        Err(DiagnosticsError::JacobianDegenerate { .. })
    ));
}

#[test]
fn vacuum_slope_of_equilibrium() {
    let s = state(unit_profile(), 128);
    assert!((vacuum_slope(&s).unwrap() + 0.25).abs() < 1e-8);
    let prof = reference();
    let expect = -prof.sigma_scale() / 6.25;
    assert!(rel(vacuum_slope(&state(prof, 128)).unwrap(), expect) < 1e-8);
}

#[test]
fn pointwise_decay_on_equilibrium_is_flagged() {
    let traj = evolve(&state(reference(), 32), 12.0, 0.5).unwrap();
    let pd = pointwise_decay_check(&traj, [5.0, 12.0]).unwrap();
    assert!(pd.zero_flag);
    assert!(pd.velocity.is_none() && pd.boundary.is_none());
}

// ---------- Hardy ----------

#[test]
fn hardy_constant_function_closed_form() {
    let prof = unit_profile();
    let nodes = hardy_grid(&prof, 128);
    let ones = vec![1.0; nodes.len()];
    let zeros = vec![0.0; nodes.len()];
    let w = hardy_check(&prof, 2.0, &nodes, &ones, &zeros).unwrap();
    assert!((w.lhs - 0.5).abs() < 1e-13);
    assert!(rel(w.rhs, 0.0039845942148857392274) < 1e-10);
    assert!(w.ratio.is_finite() && w.ratio > 1.0);
}

#[test]
fn hardy_sigma_test_function_is_finite() {
    let prof = reference();
    let (ab, r) = (prof.sigma_scale(), prof.outer_radius());
    let f = |y: f64| ab * (r - y) / (y * r);
    let fy = |y: f64| -ab / (y * y);
    for k in [1.5, 2.0, 3.0] {
        let (a, b) = hardy_refinement(&prof, k, f, fy, 64).unwrap();
        assert!(a.ratio.is_finite() && a.ratio > 0.0);
        assert!(rel(a.ratio, b.ratio) < 0.05);
    }
}

#[test]
fn hardy_zero_function() {
    let prof = reference();
    let nodes = hardy_grid(&prof, 16);
    let zeros = vec![0.0; nodes.len()];
    let w = hardy_check(&prof, 2.0, &nodes, &zeros, &zeros).unwrap();
    assert_eq!((w.lhs, w.rhs, w.ratio), (0.0, 0.0, 0.0));
}

#[test]
fn hardy_rejects_bad_input() {
    let prof = reference();
    let nodes = hardy_grid(&prof, 16);
    let ones = vec![1.0; nodes.len()];
    assert!(hardy_check(&prof, 1.0, &nodes, &ones, &ones).is_err());
    assert!(hardy_check(&prof, 2.0, &nodes, &ones[1..], &ones).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energies_nonnegative(a in -0.01f64..0.01, b in -0.01f64..0.01, m in 1u32..4) {
        let s = with_fields(
            state(reference(), 32),
            |y| a * (m as f64 * (y - 1.0)).sin().powi(3),
            |y| b * (y - 1.0).powi(3),
        );
        let r = energy_report(&s).unwrap();
        prop_assert!(r.e_j.iter().chain(r.d_j.iter()).chain(r.e_ji.iter().flatten()).all(|v| *v >= 0.0));
        prop_assert!(r.total >= r.e_j[0]);
    }

    #[test]
    fn fit_recovers_rate(delta in 0.01f64..3.0, c in 0.1f64..10.0) {
        let fit = fit_decay_rate(&series(|t| c * (-delta * t).exp(), 0.25, 10.0), [0.0, 10.0]).unwrap();
        prop_assert!((fit.delta_hat - delta).abs() < 1e-9 * delta.max(1.0));
        prop_assert!(fit.r_squared > 1.0 - 1e-9);
    }
}
