//! Direct integration of the full equations of motion `q'' = -grad U`,
//! with energy and angular-momentum diagnostics.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::sample_times;
use crate::ode::{rk4_step, Dopri5, OdeSystem};
use crate::potential::{accelerations_flat, potential_energy, BodyState, PotentialParams, SystemState, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationMethod {
    /// Classical fourth-order Runge-Kutta with step `max_step`.
    FixedRk4,
    /// Dormand-Prince 5(4) with error control.
    AdaptiveRk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    pub method: IntegrationMethod,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_end: f64,
    /// Spacing of the output grid; `None` records only the endpoints.
    pub sample_dt: Option<f64>,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            method: IntegrationMethod::AdaptiveRk,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            t_end: 1.0,
            sample_dt: None,
        }
    }
}

impl IntegrationSettings {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.rel_tol) || !unit(self.abs_tol) {
            return Err(Error::Domain(format!(
                "tolerances must lie in (0, 1), got rel_tol = {}, abs_tol = {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Domain(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(Error::Domain(format!(
                "max_step must be positive, got {}",
                self.max_step
            )));
        }
        if let Some(dt) = self.sample_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Domain(format!("sample_dt must be positive, got {dt}")));
            }
        }
        Ok(())
    }

    /// Output grid implied by `t_end` and `sample_dt`.
    pub fn sample_grid(&self) -> Vec<f64> {
        match self.sample_dt {
            Some(dt) => sample_times(self.t_end, dt),
            None => vec![0.0, self.t_end],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub time: f64,
    pub state: SystemState,
    pub energy: f64,
    pub angular_momentum: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// `max |E(t) - E(0)| / |E(0)|` (absolute when `E(0) = 0`).
    pub energy_drift: f64,
    /// `max |L(t) - L(0)| / |L(0)|` (absolute when `L(0) = 0`).
    pub angmom_drift: f64,
    pub steps: usize,
}

/// `sum |v_k|^2 / 2 + U(q)`.
pub fn total_energy(state: &SystemState, params: &PotentialParams) -> Result<f64> {
    let kinetic: f64 = state
        .bodies()
        .iter()
        .map(|b| 0.5 * b.velocity.norm_squared())
        .sum();
    Ok(kinetic + potential_energy(state, params)?)
}

/// `sum q_k x v_k`.
pub fn angular_momentum(state: &SystemState) -> Vec3 {
    state.bodies().iter().map(|b| b.position.cross(&b.velocity)).sum()
}

struct NBody<'a> {
    params: &'a PotentialParams,
    n: usize,
}

impl OdeSystem for NBody<'_> {
    fn dim(&self) -> usize {
        6 * self.n
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let m = 3 * self.n;
        dy[..m].copy_from_slice(&y[m..]);
        accelerations_flat(&y[..m], self.params, &mut dy[m..]).map_err(|e| Error::IntegrationFailure {
            time: t,
            reason: e.to_string(),
        })
    }
}

fn pack(state: &SystemState) -> Vec<f64> {
    let b = state.bodies();
    let mut y = Vec::with_capacity(6 * b.len());
    y.extend(b.iter().flat_map(|s| s.position.iter().copied()));
    y.extend(b.iter().flat_map(|s| s.velocity.iter().copied()));
    y
}

fn unpack(y: &[f64], time: f64) -> SystemState {
    let m = y.len() / 2;
    let bodies = (0..m / 3)
        .map(|k| {
            BodyState::new(
                Vec3::new(y[3 * k], y[3 * k + 1], y[3 * k + 2]),
                Vec3::new(y[m + 3 * k], y[m + 3 * k + 1], y[m + 3 * k + 2]),
            )
        })
        .collect();
    SystemState::from_trusted(bodies, time)
}

/// Integrates from `initial` over `[0, settings.t_end]`, sampling on
/// [`IntegrationSettings::sample_grid`].
pub fn integrate(
    initial: &SystemState,
    params: &PotentialParams,
    settings: &IntegrationSettings,
) -> Result<Trajectory> {
    settings.validate()?;
    integrate_at(initial, params, settings, &settings.sample_grid())
}

/// Integrates and samples at the given increasing times, starting from
/// `initial` at `times[0]`. `settings.t_end` is ignored.
pub fn integrate_at(
    initial: &SystemState,
    params: &PotentialParams,
    settings: &IntegrationSettings,
    times: &[f64],
) -> Result<Trajectory> {
    let mut check = *settings;
    check.t_end = 1.0;
    check.validate()?;
    if times.is_empty()
        || times
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater))
    {
        return Err(Error::Domain(
            "sample times must be nonempty and strictly increasing".into(),
        ));
    }
    let sys = NBody {
        params,
        n: initial.len(),
    };
    let t0 = times[0];
    let mut y = pack(initial);
    let mut samples = Vec::with_capacity(times.len());
    let mut steps = 0;
    let mut record = |t: f64, y: &[f64]| -> Result<()> {
        let state = unpack(y, t);
        samples.push(TrajectorySample {
            time: t,
            energy: total_energy(&state, params)?,
            angular_momentum: angular_momentum(&state),
            state,
        });
        Ok(())
    };
    record(t0, &y)?;
    match settings.method {
        IntegrationMethod::AdaptiveRk => {
            let mut solver = Dopri5::new(
                &sys,
                t0,
                &y,
                settings.rel_tol,
                settings.abs_tol,
                settings.max_step,
            )?;
            for &t in &times[1..] {
                solver.advance_to(t)?;
                record(t, solver.y())?;
            }
            steps = solver.accepted_steps();
        }
        IntegrationMethod::FixedRk4 => {
            let mut t = t0;
            for &target in &times[1..] {
                let n = ((target - t) / settings.max_step * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                let h = (target - t) / n as f64;
                for i in 0..n {
                    y = rk4_step(&sys, t + i as f64 * h, &y, h)?;
                }
                t = target;
                steps += n;
                record(t, &y)?;
            }
        }
    }
    let (e0, l0) = (samples[0].energy, samples[0].angular_momentum);
    let rel = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
    let energy_drift = samples
        .iter()
        .map(|s| rel((s.energy - e0).abs(), e0.abs()))
        .fold(0.0, f64::max);
    let angmom_drift = samples
        .iter()
        .map(|s| rel((s.angular_momentum - l0).norm(), l0.norm()))
        .fold(0.0, f64::max);
    Ok(Trajectory {
        samples,
        energy_drift,
        angmom_drift,
        steps,
    })
}
