use super::model::spatial_operator;
use super::{Result, SimState, SolverError};
use crate::diagnostics::{energy_report, EnergyReport};

/// Largest stable step for the current state.
///
/// Uses the Lagrangian sound speed `c = √(Aγρ^{γ-1}) / η_y` with
/// `ρ^{γ-1} = σ J^{1-γ}`, floored near the vacuum node.
pub fn stable_dt(state: &SimState) -> f64 {
    let model = &state.model;
    let params = model.profile.params();
    let g = params.gamma;
    let a = params.pressure_const;
    let stretch = state.stretch();
    let c_floor = 1e-8 * (a * g * model.sigma[0]).sqrt();
    let mut best = f64::INFINITY;
    for k in 0..model.grid.len() {
        let s = stretch[k].max(model.options.jacobian_floor);
        let jac = (1.0 + state.zeta[k]).powi(2) * s;
        let c = (a * g * model.sigma[k] * jac.powf(1.0 - g)).sqrt() / s;
        let dt = model.grid.local_spacing(k) / c.max(c_floor);
        best = best.min(dt);
    }
    (model.options.cfl * best).min(model.options.dt_cap)
}

/// One Lawson (integrating-factor) RK4 step for
/// `ζ' = v`, `v' = -v + N(ζ)`: the damping is integrated exactly through
/// `e^{-t}` and the rest by classical RK4.
pub fn lawson_rk4<F>(zeta: &[f64], vel: &[f64], dt: f64, mut op: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = zeta.len();
    let e1 = (-dt).exp();
    let eh = (-0.5 * dt).exp();
    let h2 = 0.5 * dt;

    let k1z = vel.to_vec();
    let k1v = op(zeta)?;

    let mut z2 = vec![0.0; n];
    let mut v2 = vec![0.0; n];
    for i in 0..n {
        z2[i] = zeta[i] + h2 * k1z[i];
        v2[i] = eh * (vel[i] + h2 * k1v[i]);
    }
    let k2z = v2.clone();
    let k2v = op(&z2)?;

    let mut z3 = vec![0.0; n];
    let mut v3 = vec![0.0; n];
    for i in 0..n {
        z3[i] = zeta[i] + h2 * k2z[i];
        v3[i] = eh * vel[i] + h2 * k2v[i];
    }
    let k3z = v3.clone();
    let k3v = op(&z3)?;

    let mut z4 = vec![0.0; n];
    let mut v4 = vec![0.0; n];
    for i in 0..n {
        z4[i] = zeta[i] + dt * k3z[i];
        v4[i] = e1 * vel[i] + dt * eh * k3v[i];
    }
    let k4z = v4.clone();
    let k4v = op(&z4)?;

    let c = dt / 6.0;
    let mut zn = vec![0.0; n];
    let mut vn = vec![0.0; n];
    for i in 0..n {
        zn[i] = zeta[i] + c * (k1z[i] + 2.0 * (k2z[i] + k3z[i]) + k4z[i]);
        vn[i] = e1 * vel[i] + c * (e1 * k1v[i] + 2.0 * eh * (k2v[i] + k3v[i]) + k4v[i]);
    }
    Ok((zn, vn))
}

/// Advance `state` by `dt`.
pub fn step(state: &SimState, dt: f64) -> Result<SimState> {
    let limit = stable_dt(state);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-9) {
        return Err(SolverError::CflViolation { dt, limit });
    }
    let model = &state.model;
    let (zeta, zeta_t) = lawson_rk4(&state.zeta, &state.zeta_t, dt, |z| {
        spatial_operator(model, z, state.gravity_enabled)
    })?;
    let mut next = SimState {
        model: state.model.clone(),
        zeta,
        zeta_t,
        time: state.time + dt,
        gravity_enabled: state.gravity_enabled,
    };
    next.pin();
    Ok(next)
}

/// Snapshots of a run with one energy report each.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshot_times: Vec<f64>,
    pub states: Vec<SimState>,
    pub reports: Vec<EnergyReport>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `(t, E_total)` pairs.
    pub fn energy_series(&self) -> Vec<(f64, f64)> {
        self.reports.iter().map(|r| (r.time, r.total)).collect()
    }
}

/// Step to `t_end`, recording a snapshot at the start and every
/// `snapshot_every` time units (and at `t_end`).
pub fn evolve(state: &SimState, t_end: f64, snapshot_every: f64) -> Result<Trajectory> {
    if !(t_end > state.time) {
        return Err(SolverError::InvalidTime {
            time: state.time,
            t_end,
        });
    }
    if !(snapshot_every > 0.0) {
        return Err(SolverError::InvalidTime {
            time: state.time,
            t_end: snapshot_every,
        });
    }
    let t0 = state.time;
    let mut traj = Trajectory {
        snapshot_times: Vec::new(),
        states: Vec::new(),
        reports: Vec::new(),
    };
    let record = |traj: &mut Trajectory, s: &SimState| -> Result<()> {
        let report = energy_report(s).map_err(|e| SolverError::AtTime {
            time: s.time,
            source: Box::new(e.into()),
        })?;
        traj.snapshot_times.push(s.time);
        traj.reports.push(report);
        traj.states.push(s.clone());
        Ok(())
    };
    record(&mut traj, state)?;

    let mut current = state.clone();
    let mut k = 1usize;
    loop {
        let target = (t0 + k as f64 * snapshot_every).min(t_end);
        while current.time < target {
            let remaining = target - current.time;
            let mut dt = stable_dt(&current);
            if dt >= remaining {
                dt = remaining;
            } else if dt > 0.5 * remaining {
                // avoid a sliver step before the snapshot
                dt = 0.5 * remaining;
            }
            let mut next = step(&current, dt).map_err(|e| SolverError::AtTime {
                time: current.time,
                source: Box::new(e),
            })?;
            if (target - next.time).abs() <= 1e-12 * target.abs().max(1.0) {
                next.time = target;
            }
            current = next;
        }
        record(&mut traj, &current)?;
        if target >= t_end {
            break;
        }
        k += 1;
    }
    Ok(traj)
}
