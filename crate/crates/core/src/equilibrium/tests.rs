use super::*;
use proptest::prelude::*;

fn params(gamma: f64, a: f64, g0: f64, r0: f64) -> GasParameters {
    GasParameters::new(gamma, a, g0, r0).unwrap()
}

/// Values from a 40-digit evaluation of ((γ-1) g₀ / (γ A))^{1/(γ-1)}.
const ABAR_ORACLE: [(f64, f64, f64, f64); 10] = [
    (2.832968, 1.152503, 4.861702, 1.729410273664573627),
    (2.648921, 0.393455, 6.139401, 3.970019588765872707),
    (2.074084, 2.228127, 4.01787, 0.93825004662460846757),
    (2.322583, 4.9055, 6.348918, 0.79395000466492051035),
    (2.323581, 4.976775, 8.323261, 0.96402272363421876842),
    (2.589937, 2.588768, 8.539936, 1.5586365996299570775),
    (1.163259, 1.323987, 1.881701, 0.000051466358592575924162),
    (2.982035, 1.50166, 3.577746, 1.2610229243120836423),
    (2.863769, 1.496174, 3.969373, 1.3404966171711263538),
    (2.703006, 0.418218, 8.165755, 4.3653882293419694673),
];

#[test]
fn abar_examples() {
    assert_eq!(compute_abar(&params(2.0, 1.0, 2.0, 1.0)), 1.0);
    assert!((compute_abar(&params(5.0 / 3.0, 1.0, 1.0, 1.0)) - 0.252_982_212_813_470_35).abs() < 1e-15);
    assert!((compute_abar(&params(2.0, 1.0, 4.0, 1.0)) - 2.0).abs() < 1e-15);
}

#[test]
fn abar_matches_high_precision_oracle() {
    for (g, a, g0, expected) in ABAR_ORACLE {
        let got = compute_abar(&params(g, a, g0, 1.0));
        assert!(((got - expected) / expected).abs() < 1e-14, "{g} {a} {g0}: {got} vs {expected}");
    }
}

#[test]
fn invalid_parameters_rejected() {
    assert!(GasParameters::new(1.0, 1.0, 1.0, 1.0).is_err());
    assert!(GasParameters::new(2.0, 0.0, 1.0, 1.0).is_err());
    assert!(GasParameters::new(2.0, 1.0, -1.0, 1.0).is_err());
    assert!(GasParameters::new(2.0, 1.0, 1.0, 0.0).is_err());
    assert!(params(2.0, 1.0, 1.0, 1.0).with_self_gravity(-1.0).is_err());
    assert!(EquilibriumProfile::new(params(2.0, 1.0, 2.0, 1.0), 1.0).is_err());
}

#[test]
fn density_examples() {
    let p = EquilibriumProfile::new(params(2.0, 1.0, 2.0, 1.0), 2.0).unwrap();
    assert_eq!(p.density(2.0).unwrap(), 0.0);
    assert_eq!(p.density(3.0).unwrap(), 0.0);
    assert!((p.density(1.0).unwrap() - 0.5).abs() < 1e-15);
    assert!((p.density(4.0 / 3.0).unwrap() - 0.25).abs() < 1e-15);
    assert!(matches!(p.density(0.5), Err(EquilibriumError::Domain { .. })));
    // strictly decreasing
    let mut last = f64::INFINITY;
    for k in 0..100 {
        let r = 1.0 + k as f64 / 100.0;
        let d = p.density(r).unwrap();
        assert!(d < last);
        last = d;
    }
}

#[test]
fn sigma_examples() {
    let p = EquilibriumProfile::new(params(2.0, 1.0, 2.0, 1.0), 2.0).unwrap();
    let (s, sy) = p.sigma_and_slope(2.0).unwrap();
    assert_eq!(s, 0.0);
    assert!((sy + 0.25).abs() < 1e-15);
    let (s, sy) = p.sigma_and_slope(1.0).unwrap();
    assert!((s - 0.5).abs() < 1e-15 && (sy + 1.0).abs() < 1e-15);
    for k in 0..=10 {
        let y = 1.0 + k as f64 / 10.0;
        let (_, sy) = p.sigma_and_slope(y).unwrap();
        assert!((sy * y * y + p.sigma_scale()).abs() < 1e-14);
    }
    assert!(p.sigma_and_slope(2.5).is_err());
    assert!(p.sigma_and_slope(0.9).is_err());
}

#[test]
fn mass_closed_form_gamma_two() {
    let p = EquilibriumProfile::new(params(2.0, 1.0, 2.0, 1.0), 2.0).unwrap();
    let exact = 4.0 * std::f64::consts::PI * ((4.0 - 1.0) / 2.0 - (8.0 - 1.0) / 6.0);
    assert!((exact - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
    assert!(((total_mass(&p) - exact) / exact).abs() < 1e-10);
}

#[test]
fn mass_vanishes_as_radius_approaches_core() {
    let pr = params(5.0 / 3.0, 1.0, 1.0, 1.0);
    let m1 = EquilibriumProfile::new(pr, 1.001).unwrap().total_mass();
    let m2 = EquilibriumProfile::new(pr, 1.000001).unwrap().total_mass();
    assert!(m1 < 1e-5 && m2 < m1 && m2 < 1e-12);
}

#[test]
fn mass_matches_brute_force_riemann() {
    let pr = params(5.0 / 3.0, 1.0, 1.0, 1.0);
    let p = EquilibriumProfile::new(pr, 2.5).unwrap();
    // 10⁶-panel midpoint sum, independent of the adaptive rule.
    let n = 1_000_000;
    let (a, b) = (1.0, 2.5);
    let h = (b - a) / n as f64;
    let abar = p.abar();
    let mut s = 0.0;
    for k in 0..n {
        let r = a + (k as f64 + 0.5) * h;
        s += (1.0 / r - 1.0 / b).powf(1.5) * r * r;
    }
    let brute = 4.0 * std::f64::consts::PI * abar * s * h;
    assert!(((p.total_mass() - brute) / brute).abs() < 1e-8);
    // 40-digit reference
    assert!(((p.total_mass() - 1.053_253_536_147_692_4) / 1.053_253_536_147_692_4).abs() < 1e-10);
}

#[test]
fn radius_from_mass_inverts_closed_form() {
    let pr = params(2.0, 1.0, 2.0, 1.0);
    let p = radius_from_mass(&pr, 4.0 * std::f64::consts::PI / 3.0).unwrap();
    assert!((p.outer_radius() - 2.0).abs() < 1e-7);
    let tiny = radius_from_mass(&pr, 1e-12).unwrap();
    assert!(tiny.outer_radius() - 1.0 < 1e-3);
}

#[test]
fn radius_from_mass_threshold() {
    let pr = params(1.2, 1.0, 1.0, 1.0);
    let m_star = pr.mass_star();
    assert!(m_star.is_finite());
    assert!(matches!(
        radius_from_mass(&pr, m_star),
        Err(EquilibriumError::MassExceedsThreshold { .. })
    ));
    assert!(matches!(
        radius_from_mass(&pr, 2.0 * m_star),
        Err(EquilibriumError::MassExceedsThreshold { .. })
    ));
    assert!(radius_from_mass(&pr, 0.5 * m_star).is_ok());
    assert!(params(5.0 / 3.0, 1.0, 1.0, 1.0).mass_star().is_infinite());
}

#[test]
fn mass_approaches_threshold_for_soft_gas() {
    let pr = params(1.2, 1.0, 1.0, 1.0);
    let p = EquilibriumProfile::new(pr, 1e4).unwrap();
    let rel = (p.total_mass() - pr.mass_star()).abs() / pr.mass_star();
    assert!(rel < 0.01, "rel {rel}");
    assert!(p.total_mass() < pr.mass_star());
}

#[test]
fn radius_window_examples() {
    let pr = params(5.0 / 3.0, 1.0, 1.0, 1.0);
    let ok = check_radius_window(&EquilibriumProfile::new(pr, 2.5).unwrap());
    assert!(ok.pass);
    assert!((ok.margin - (8.0 / 3.0 - 2.5)).abs() < 1e-14);
    assert!(!check_radius(&pr, 1.0).pass);
    assert!(!check_radius_window(&EquilibriumProfile::new(pr, 2.8).unwrap()).pass);
    let soft = check_radius(&params(1.3, 1.0, 1.0, 1.0), 50.0);
    assert!(soft.pass && soft.note.is_some());
}

#[test]
fn equilibrium_residual_examples() {
    let pr = params(5.0 / 3.0, 1.0, 1.0, 1.0);
    let p = EquilibriumProfile::new(pr, 2.5).unwrap();
    let mesh: Vec<f64> = (1..200).map(|k| 1.0 + 1.5 * k as f64 / 200.0).collect();
    assert!(p.residual(&mesh).unwrap() <= 1e-12);
    let detuned = p.with_abar(1.01 * p.abar());
    assert!(detuned.residual(&mesh).unwrap() > 1e-4);
    let mid = 1.75;
    let single = p.residual(&[mid]).unwrap();
    let dense_pt = p.residual(&[mid]).unwrap();
    assert_eq!(single, dense_pt);
    assert!(p.residual(&[1.0]).is_err());
}

#[test]
fn energy_order_floor() {
    assert_eq!(params(1.4, 1.0, 1.0, 1.0).energy_order(), 6);
    assert_eq!(params(5.0 / 3.0, 1.0, 1.0, 1.0).energy_order(), 5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn abar_scale_invariant(g in 1.05f64..3.0, a in 0.1f64..5.0, g0 in 0.1f64..5.0, k in 0.01f64..100.0) {
        let base = compute_abar(&params(g, a, g0, 1.0));
        let scaled = compute_abar(&params(g, k * a, k * g0, 1.0));
        prop_assert!(((base - scaled) / base).abs() < 1e-12);
    }

    #[test]
    fn mass_increasing_in_radius(g in 1.35f64..2.5, r1 in 1.01f64..3.0, dr in 0.01f64..2.0) {
        let pr = params(g, 1.0, 1.0, 1.0);
        let m1 = EquilibriumProfile::new(pr, r1).unwrap().total_mass();
        let m2 = EquilibriumProfile::new(pr, r1 + dr).unwrap().total_mass();
        prop_assert!(m1 < m2);
    }

    #[test]
    fn radius_mass_roundtrip(g in 1.35f64..2.5, a in 0.5f64..2.0, r in 1.05f64..4.0) {
        let pr = params(g, a, 1.0, 1.0);
        let p = EquilibriumProfile::new(pr, r).unwrap();
        let back = radius_from_mass(&pr, p.total_mass()).unwrap();
        prop_assert!(((back.outer_radius() - r) / r).abs() < 1e-7);
    }
}

// --- Euler–Poisson ---

fn reference_params() -> GasParameters {
    params(5.0 / 3.0, 1.0, 1.0, 1.0)
}

#[test]
fn poisson_zero_gravity_recovers_closed_form() {
    let pr = reference_params();
    let closed = EquilibriumProfile::new(pr, 2.5).unwrap();
    let rho_c = closed.density(1.0).unwrap();
    let sol = solve_poisson_equilibrium(&pr, rho_c, &PoissonOptions::default()).unwrap();
    assert!(((sol.first_zero_radius - 2.5) / 2.5).abs() < 1e-6, "{}", sol.first_zero_radius);
    assert!(sol.max_residual <= 1e-8, "{}", sol.max_residual);
    assert!(((sol.total_mass - closed.total_mass()) / closed.total_mass()).abs() < 1e-6);
    // samples decreasing and matching the closed form
    for w in sol.density_samples.windows(2) {
        assert!(w[1] < w[0]);
    }
    for (r, d) in sol.radii.iter().zip(&sol.density_samples) {
        assert!((d - closed.density(*r).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn poisson_first_order_in_g() {
    let closed = EquilibriumProfile::new(reference_params(), 2.5).unwrap();
    let rho_c = closed.density(1.0).unwrap();
    let opts = PoissonOptions::default();
    let dr = |g: f64| {
        let pr = reference_params().with_self_gravity(g).unwrap();
        solve_poisson_equilibrium(&pr, rho_c, &opts).unwrap().first_zero_radius - 2.5
    };
    let d1 = dr(1e-3);
    let d2 = dr(5e-4);
    assert!(d1 < 0.0 && d2 < 0.0);
    let ratio = d1 / d2;
    assert!((ratio - 2.0).abs() < 0.01, "ratio {ratio}");
}

#[test]
fn poisson_mass_increases_with_central_density() {
    let pr = reference_params().with_self_gravity(0.05).unwrap();
    let opts = PoissonOptions::default();
    let mut last = 0.0;
    for k in 1..=8 {
        let rho_c = 0.01 * k as f64;
        let sol = solve_poisson_equilibrium(&pr, rho_c, &opts).unwrap();
        // brute-force midpoint on the tabulated density
        let n = 20_000;
        let h = (sol.first_zero_radius - 1.0) / n as f64;
        let brute: f64 = (0..n)
            .map(|i| {
                let r = 1.0 + (i as f64 + 0.5) * h;
                4.0 * std::f64::consts::PI * sol.density_at(r) * r * r * h
            })
            .sum();
        assert!(((brute - sol.total_mass) / sol.total_mass).abs() < 1e-3);
        assert!(sol.total_mass > last);
        last = sol.total_mass;
    }
}

#[test]
fn poisson_no_zero_reported() {
    let pr = reference_params();
    // w(r₀) ≥ Ā^{γ-1}/r₀ means the G = 0 profile never vanishes.
    let rho_c = (pr.alpha().recip() * 0.0 + compute_abar(&pr)) * 1.5;
    let opts = PoissonOptions {
        radius_cap_factor: 50.0,
        ..Default::default()
    };
    assert!(matches!(
        solve_poisson_equilibrium(&pr, rho_c, &opts),
        Err(EquilibriumError::NoZeroFound { .. })
    ));
}

#[test]
fn poisson_mass_wrapper_hits_target() {
    let pr = reference_params().with_self_gravity(0.1).unwrap();
    let opts = PoissonOptions::default();
    let sol = solve_poisson_for_mass(&pr, 0.5, &opts).unwrap();
    assert!(((sol.total_mass - 0.5) / 0.5).abs() < 1e-8);
}
