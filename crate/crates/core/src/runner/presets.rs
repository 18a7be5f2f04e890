use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use super::config::{RadiusSpec, ScenarioConfig};
use super::report::{
    Assertion, HardyCase, PointwiseFits, PoissonSummary, RunReport, SnapshotRow, SweepCase,
};
use super::{Result, RunnerError};
use crate::diagnostics::{
    elliptic_ratio, eulerian_reconstruct, fit_decay_rate, hardy_refinement, pointwise_decay_check,
    reconstructed_mass, vacuum_slope,
};
use crate::equilibrium::{
    radius_from_mass, solve_poisson_equilibrium, window_upper, EquilibriumProfile, GasParameters,
    PoissonOptions,
};
use crate::solver::{apply_perturbation, build_grid, evolve, Model, SimState, Trajectory};
use crate::spectrum::{assemble_linearized, eigen_modes_with_floor, SpectrumResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Stationarity,
    Decay,
    Spectrum,
    WindowSweep,
    PoissonEquilibrium,
    Hardy,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Stationarity,
        Preset::Decay,
        Preset::Spectrum,
        Preset::WindowSweep,
        Preset::PoissonEquilibrium,
        Preset::Hardy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Stationarity => "stationarity",
            Preset::Decay => "decay",
            Preset::Spectrum => "spectrum",
            Preset::WindowSweep => "window-sweep",
            Preset::PoissonEquilibrium => "poisson-equilibrium",
            Preset::Hardy => "hardy",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Preset::Stationarity => "evolve the unperturbed equilibrium; zeta and energy stay at zero",
            Preset::Decay => "perturbed run with energy decay fit, pointwise decay, mass, vacuum and elliptic checks",
            Preset::Spectrum => "eigenvalues of the linearised operator and their mesh convergence",
            Preset::WindowSweep => "spectrum over gamma x radius samples inside the stability window",
            Preset::PoissonEquilibrium => "self-gravitating equilibrium against the closed-form radius",
            Preset::Hardy => "weighted Hardy inequality ratios under mesh doubling",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

/// Run the preset named in the config single-threaded.
pub fn run_preset(cfg: &ScenarioConfig) -> Result<RunReport> {
    run_preset_with_jobs(cfg, 1)
}

/// Run the preset named in the config; `jobs` threads serve the
/// independent window-sweep cases and never change the results.
pub fn run_preset_with_jobs(cfg: &ScenarioConfig, jobs: usize) -> Result<RunReport> {
    let preset = Preset::from_name(&cfg.preset).ok_or_else(|| RunnerError::UnknownPreset(cfg.preset.clone()))?;
    cfg.validate()?;
    let start = Instant::now();
    let mut rep = RunReport::new(cfg);
    match preset {
        Preset::Stationarity => stationarity(cfg, &mut rep)?,
        Preset::Decay => decay(cfg, &mut rep)?,
        Preset::Spectrum => spectrum(cfg, &mut rep)?,
        Preset::WindowSweep => window_sweep(cfg, &mut rep, jobs.max(1))?,
        Preset::PoissonEquilibrium => poisson(cfg, &mut rep)?,
        Preset::Hardy => hardy(cfg, &mut rep)?,
    }
    rep.wall_seconds = start.elapsed().as_secs_f64();
    Ok(rep)
}

fn profile(cfg: &ScenarioConfig) -> Result<EquilibriumProfile> {
    let ctx = "building the equilibrium";
    let params = GasParameters::new(
        cfg.gas.gamma,
        cfg.gas.pressure_const,
        cfg.gas.core_gravity,
        cfg.gas.core_radius,
    )
    .and_then(|p| p.with_self_gravity(cfg.gas.self_gravity_const))
    .map_err(RunnerError::equilibrium(ctx))?;
    match cfg.radius {
        RadiusSpec::Outer(r) => EquilibriumProfile::new(params, r),
        RadiusSpec::Mass(m) => radius_from_mass(&params, m),
    }
    .map_err(RunnerError::equilibrium(ctx))
}

fn equilibrium_state(cfg: &ScenarioConfig, prof: &EquilibriumProfile, n_cells: usize) -> Result<SimState> {
    let grid = build_grid(prof, n_cells, cfg.grid.grading_power).map_err(RunnerError::solver("building the grid"))?;
    let model = Arc::new(Model::new(*prof, grid, cfg.solver));
    Ok(SimState::equilibrium(model).with_gravity(cfg.gas.self_gravity_const > 0.0))
}

fn rows(traj: &Trajectory) -> Result<Vec<SnapshotRow>> {
    let ctx = "reconstructing Eulerian fields";
    traj.states
        .iter()
        .zip(&traj.reports)
        .map(|(s, r)| {
            let fields = eulerian_reconstruct(s).map_err(RunnerError::diagnostics(ctx))?;
            let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            Ok(SnapshotRow {
                t: s.time,
                e0: r.e_j[0],
                e1: r.e_j[1],
                e2: r.e_j[2],
                e01: r.get_ji(0, 1).unwrap_or(f64::NAN),
                e_total: r.total,
                d0: r.d_j[0],
                max_zeta: max_abs(&s.zeta),
                max_u: max_abs(&fields.velocity),
                r_t: fields.boundary_radius,
                mass: reconstructed_mass(&fields),
                vacuum_slope: vacuum_slope(s).map_err(RunnerError::diagnostics(ctx))?,
            })
        })
        .collect()
}

fn run_trajectory(cfg: &ScenarioConfig, state: &SimState) -> Result<Trajectory> {
    evolve(state, cfg.run.t_end, cfg.run.snapshot_every).map_err(RunnerError::solver("time stepping"))
}

fn stationarity(cfg: &ScenarioConfig, rep: &mut RunReport) -> Result<()> {
    let prof = profile(cfg)?;
    let traj = run_trajectory(cfg, &equilibrium_state(cfg, &prof, cfg.grid.n_cells)?)?;
    rep.rows = rows(&traj)?;
    rep.energies = traj.reports;
    let max_zeta = rep.rows.iter().map(|r| r.max_zeta).fold(0.0, f64::max);
    let max_e = rep.rows.iter().map(|r| r.e_total).fold(0.0, f64::max);
    rep.check(Assertion::at_most("stationarity.max_zeta", max_zeta, 1e-10));
    rep.check(Assertion::at_most("stationarity.max_energy", max_e, 1e-18));
    Ok(())
}

/// Snapshot value closest to `t`.
fn nearest(series: &[(f64, f64)], t: f64) -> (f64, f64) {
    *series
        .iter()
        .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
        .expect("nonempty series")
}

fn decay(cfg: &ScenarioConfig, rep: &mut RunReport) -> Result<()> {
    let prof = profile(cfg)?;
    let perturbed = |n: usize| -> Result<Trajectory> {
        let s0 = equilibrium_state(cfg, &prof, n)?;
        let s0 = apply_perturbation(&s0, &cfg.perturbation).map_err(RunnerError::solver("applying the perturbation"))?;
        run_trajectory(cfg, &s0)
    };
    let traj = perturbed(cfg.grid.n_cells)?;
    rep.rows = rows(&traj)?;
    let window = cfg.run.fit_window;
    let series = traj.energy_series();
    let fit = fit_decay_rate(&series, window).map_err(RunnerError::diagnostics("fitting the energy decay"))?;
    rep.decay_fit = Some(fit);
    let delta = fit.delta_hat;
    rep.check(Assertion::above("decay.delta_hat", delta, 0.0));
    rep.check(Assertion::at_least("decay.r_squared", fit.r_squared, 0.99));
    let (t_lo, e_lo) = nearest(&series, window[0]);
    let (t_hi, e_hi) = nearest(&series, window[1]);
    let endpoint = e_hi / e_lo * (delta * (t_hi - t_lo)).exp();
    rep.check(Assertion::within("decay.endpoint_ratio", endpoint, Some(0.8), Some(1.2)));
    // Largest relative rise of E_total between consecutive post-transient
    // snapshots; a strictly decreasing column gives a negative value.
    let rise = series
        .windows(2)
        .filter(|w| w[0].0 >= window[0])
        .map(|w| (w[1].1 - w[0].1) / w[0].1)
        .fold(f64::NEG_INFINITY, f64::max);
    rep.check(Assertion::below("decay.energy_max_relative_rise", rise, 0.0));

    let pw = pointwise_decay_check(&traj, window).map_err(RunnerError::diagnostics("fitting pointwise decay"))?;
    let rate = |f: &Option<crate::diagnostics::DecayFit>| f.map_or(f64::NAN, |f| f.delta_hat);
    let r2 = |f: &Option<crate::diagnostics::DecayFit>| f.map_or(f64::NAN, |f| f.r_squared);
    rep.check(Assertion::above("pointwise.velocity_rate", rate(&pw.velocity), 0.0));
    rep.check(Assertion::at_least("pointwise.velocity_r_squared", r2(&pw.velocity), 0.95));
    rep.check(Assertion::above("pointwise.boundary_rate", rate(&pw.boundary), 0.0));
    rep.check(Assertion::at_least("pointwise.boundary_r_squared", r2(&pw.boundary), 0.95));
    let half = rate(&pw.boundary) / (0.5 * delta) - 1.0;
    rep.check(Assertion::at_most("pointwise.boundary_rate_vs_half_delta", half.abs(), 0.3));
    rep.pointwise = Some(PointwiseFits {
        velocity: pw.velocity,
        boundary: pw.boundary,
    });

    let m0 = rep.rows[0].mass;
    let drift = rep.rows.iter().map(|r| (r.mass / m0 - 1.0).abs()).fold(0.0, f64::max);
    rep.check(Assertion::at_most("mass.relative_drift", drift, 1e-6));

    let scale = prof.abar().powf(prof.gamma() - 1.0) / prof.outer_radius().powi(2);
    let scaled: Vec<f64> = rep.rows.iter().map(|r| r.vacuum_slope / scale).collect();
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rep.check(Assertion::at_least("vacuum.min_scaled_slope", lo, -10.0));
    rep.check(Assertion::at_most("vacuum.max_scaled_slope", hi, -0.1));

    let ell = elliptic_ratio(&traj);
    let max_ratio = ell.max_ratio.unwrap_or(f64::NAN);
    let first = ell
        .samples
        .iter()
        .find(|s| s.0 >= window[0])
        .map_or(f64::NAN, |s| s.1);
    rep.check(Assertion::below("elliptic.max_over_post_transient", max_ratio / first, 10.0));
    if cfg.run.compare_cells > 0 {
        let fine = perturbed(cfg.run.compare_cells)?;
        let fine_max = elliptic_ratio(&fine).max_ratio.unwrap_or(f64::NAN);
        let change = (max_ratio / fine_max - 1.0).abs();
        rep.check(Assertion::at_most("elliptic.mesh_change", change, 0.2));
    }

    let spec = spectrum_at(cfg, &prof, cfg.grid.n_cells, cfg.spectrum.n_modes)?;
    let predicted = spec.predicted_delta.unwrap_or(f64::NAN);
    rep.check(Assertion::at_most("spectral.delta_mismatch", (delta / predicted - 1.0).abs(), 0.25));
    rep.spectrum = Some(spec);
    rep.energies = traj.reports;
    Ok(())
}

fn spectrum_at(cfg: &ScenarioConfig, prof: &EquilibriumProfile, n: usize, keep: usize) -> Result<SpectrumResult> {
    let grid = build_grid(prof, n, cfg.grid.grading_power).map_err(RunnerError::solver("building the grid"))?;
    let op = assemble_linearized(prof, &grid);
    eigen_modes_with_floor(&op, keep, cfg.spectrum.node_floor).map_err(RunnerError::spectrum("computing eigenvalues"))
}

fn spectrum(cfg: &ScenarioConfig, rep: &mut RunReport) -> Result<()> {
    let prof = profile(cfg)?;
    let spec = spectrum_at(cfg, &prof, cfg.grid.n_cells, cfg.spectrum.n_modes)?;
    let min_mu = spec.modes.iter().map(|m| m.mu).fold(f64::INFINITY, f64::min);
    rep.check(Assertion::above("spectrum.min_mu", min_mu, 0.0));
    let delta = spec.predicted_delta.unwrap_or(f64::NAN);
    rep.check(Assertion::within("spectrum.predicted_delta", delta, Some(f64::MIN_POSITIVE), Some(1.0)));
    if cfg.spectrum.compare_cells > 0 {
        let fine = spectrum_at(cfg, &prof, cfg.spectrum.compare_cells, cfg.spectrum.n_modes)?;
        let change = spec
            .modes
            .iter()
            .zip(&fine.modes)
            .map(|(a, b)| ((a.mu - b.mu) / b.mu).abs())
            .fold(0.0, f64::max);
        rep.check(Assertion::at_most("spectrum.mesh_change", change, 1e-4));
        rep.spectrum_compare = Some(fine);
    }
    rep.spectrum = Some(spec);
    Ok(())
}

fn sweep_case(cfg: &ScenarioConfig, gamma: f64, fraction: f64) -> Result<SweepCase> {
    let g = &cfg.gas;
    let params = GasParameters::new(gamma, g.pressure_const, g.core_gravity, g.core_radius)
        .map_err(RunnerError::equilibrium("window-sweep parameters"))?;
    let top = window_upper(&params);
    let outer_radius = g.core_radius + fraction * (top - g.core_radius);
    let prof = EquilibriumProfile::new(params, outer_radius).map_err(RunnerError::equilibrium("window-sweep equilibrium"))?;
    let spec = spectrum_at(cfg, &prof, cfg.sweep.n_cells, cfg.sweep.n_modes)?;
    Ok(SweepCase {
        gamma,
        outer_radius,
        window_upper: top,
        mu: spec.mu(),
        predicted_delta: spec.predicted_delta,
    })
}

fn window_sweep(cfg: &ScenarioConfig, rep: &mut RunReport, jobs: usize) -> Result<()> {
    let cases: Vec<(f64, f64)> = cfg
        .sweep
        .gammas
        .iter()
        .flat_map(|&g| cfg.sweep.fractions.iter().map(move |&f| (g, f)))
        .collect();
    let slots: Vec<Mutex<Option<Result<SweepCase>>>> = cases.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(cases.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(g, f)) = cases.get(i) else { break };
                *slots[i].lock().expect("slot lock") = Some(sweep_case(cfg, g, f));
            });
        }
    });
    for slot in slots {
        let case = slot.into_inner().expect("slot lock").expect("every case ran")?;
        let min_mu = case.mu.iter().copied().fold(f64::INFINITY, f64::min);
        rep.check(Assertion::above(
            format!("window_sweep.min_mu[gamma={},R={}]", case.gamma, case.outer_radius),
            min_mu,
            0.0,
        ));
        rep.sweep.push(case);
    }
    Ok(())
}

fn poisson(cfg: &ScenarioConfig, rep: &mut RunReport) -> Result<()> {
    let prof = profile(cfg)?;
    let closed = EquilibriumProfile::new(
        GasParameters {
            self_gravity_const: 0.0,
            ..*prof.params()
        },
        prof.outer_radius(),
    )
    .map_err(RunnerError::equilibrium("closed-form reference"))?;
    let rho_c = closed.density(closed.core_radius()).map_err(RunnerError::equilibrium("central density"))?;
    let opts = PoissonOptions {
        radius_cap_factor: cfg.poisson.radius_cap,
        ..PoissonOptions::default()
    };
    let sol = solve_poisson_equilibrium(prof.params(), rho_c, &opts)
        .map_err(RunnerError::equilibrium("solving the self-gravitating equilibrium"))?;
    let r_closed = closed.outer_radius();
    let rel = (sol.first_zero_radius / r_closed - 1.0).abs();
    rep.check(Assertion::at_most("poisson.radius_relative_error", rel, 1e-4));
    rep.check(Assertion::at_most("poisson.max_residual", sol.max_residual, 1e-8));
    rep.poisson = Some(PoissonSummary {
        central_density: rho_c,
        closed_form_radius: r_closed,
        first_zero_radius: sol.first_zero_radius,
        total_mass: sol.total_mass,
        max_residual: sol.max_residual,
        nodes: sol.radii.len(),
    });
    Ok(())
}

fn hardy(cfg: &ScenarioConfig, rep: &mut RunReport) -> Result<()> {
    let prof = profile(cfg)?;
    let r = prof.outer_radius();
    let sigma = |y: f64| prof.sigma_and_slope_unchecked(y);
    type Family<'a> = (&'static str, Box<dyn Fn(f64) -> f64 + 'a>, Box<dyn Fn(f64) -> f64 + 'a>);
    let families: [Family; 3] = [
        ("one", Box::new(|_| 1.0), Box::new(|_| 0.0)),
        ("sigma", Box::new(move |y| sigma(y).0), Box::new(move |y| sigma(y).1)),
        ("vacuum_distance_squared", Box::new(move |y| (r - y).powi(2)), Box::new(move |y| -2.0 * (r - y))),
    ];
    for &k in &cfg.hardy.exponents {
        for (name, f, fy) in &families {
            let (coarse, fine) = hardy_refinement(&prof, k, f, fy, cfg.hardy.n_cells)
                .map_err(RunnerError::diagnostics("Hardy refinement"))?;
            let change = if coarse.ratio == fine.ratio { 0.0 } else { (fine.ratio / coarse.ratio - 1.0).abs() };
            rep.check(Assertion::at_most(format!("hardy.ratio_change[k={k},F={name}]"), change, 0.05));
            rep.hardy.push(HardyCase {
                family: name.to_string(),
                coarse,
                fine,
            });
        }
    }
    Ok(())
}
