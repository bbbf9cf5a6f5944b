use anyhow::Result;
use rayon::prelude::*;
use serde_json::{json, Value};

use lj_homographic::configurations::{circular_radius_in, g_value, omega0_terms_in};
use lj_homographic::thresholds::{admissibility_margin, lambda1_target, lambda2_target};
use lj_homographic::verify::{verify_circular, verify_homographic};
use lj_homographic::{
    admissibility_holds, capital_lambda, find_lambda1, find_lambda2, integrate, rbar, trajectory_deviation,
    CircularSolution, Family, IntegrationSettings, LambdaDomain, RadialProblem, RingConfiguration,
    SystemState, ThresholdReport,
};

use crate::config::RunConfig;
use crate::exit::{Exit, FAIL, PASS};
use crate::output::{emit_data, emit_report, num, Csv};

const CIRCULAR_SAMPLES: usize = 100;
const RADIAL_SAMPLES: f64 = 200.0;

fn params_json(cfg: &RunConfig) -> Value {
    json!({
        "alpha": cfg.params.alpha(),
        "beta": cfg.params.beta(),
        "n_ring": cfg.n_ring,
        "domain": match cfg.domain {
            LambdaDomain::Proven => "proven",
            LambdaDomain::Exploratory => "exploratory",
        },
    })
}

/// Circular solution for the run, refused below the family's threshold
/// unless the run is exploratory.
fn circular_solution(cfg: &RunConfig) -> Result<(CircularSolution, Value)> {
    let lambda = cfg.lambda()?;
    let mut threshold = Value::Null;
    if cfg.domain == LambdaDomain::Proven {
        let (name, value) = match cfg.family {
            Family::TwoPlusN => ("lambda_1", find_lambda1(cfg.n_ring, &cfg.params)?),
            Family::ThreePlusN => ("lambda_2", find_lambda2(cfg.n_ring, &cfg.params)?),
        };
        if lambda < value {
            return Err(Exit::invalid(format!(
                "lambda: {lambda} is below {name} = {value} for the {} family with N = {}",
                cfg.family, cfg.n_ring
            ))
            .into());
        }
        threshold = json!({ "name": name, "value": value });
    }
    let sol = CircularSolution::new_in(cfg.family, lambda, cfg.n_ring, &cfg.params, cfg.domain)
        .map_err(|e| Exit::invalid(format!("lambda: {e}")))?;
    Ok((sol, threshold))
}

pub fn verify_circular_cmd(cfg: &RunConfig) -> Result<u8> {
    let (sol, threshold) = circular_solution(cfg)?;
    let report = verify_circular(&sol, CIRCULAR_SAMPLES, &cfg.tolerances)?;
    let out = json!({
        "command": "verify-circular",
        "family": cfg.family,
        "lambda": sol.config.lambda,
        "params": params_json(cfg),
        "r0": sol.config.r0,
        "omega0": sol.omega0,
        "period": sol.period(),
        "threshold": threshold,
        "report": report,
    });
    emit_report(cfg.output_path.as_deref(), &out)?;
    Ok(if report.passed { PASS } else { FAIL })
}

pub fn thresholds_cmd(cfg: &RunConfig) -> Result<u8> {
    let (n, p) = (cfg.n_ring, &cfg.params);
    let r = ThresholdReport::compute(n, p)?;
    let out = json!({
        "command": "thresholds",
        "params": params_json(cfg),
        "grid_resolution": r.grid_resolution,
        "lambda1": {
            "value": r.lambda1,
            "g1": g_value(Family::TwoPlusN, r.lambda1, n, p, LambdaDomain::Proven)?,
            "target": lambda1_target(n, p)?,
        },
        "lambda2": {
            "value": r.lambda2,
            "g2": g_value(Family::ThreePlusN, r.lambda2, n, p, LambdaDomain::Proven)?,
            "target": lambda2_target(n, p)?,
        },
        "lambda0": {
            "value": r.lambda0,
            "admissible": admissibility_holds(r.lambda0, n, p)?,
            "admissibility_margin": admissibility_margin(r.lambda0, n, p)?,
            "capital_lambda": capital_lambda(r.lambda0, n, p)?,
            "rbar": rbar(r.lambda0, n, p)?,
        },
    });
    emit_report(cfg.output_path.as_deref(), &out)?;
    Ok(PASS)
}

pub fn radial_cmd(cfg: &RunConfig) -> Result<u8> {
    if cfg.family != Family::TwoPlusN {
        return Err(Exit::invalid("family: radial orbits exist for the 2N family only".into()).into());
    }
    let lambda = cfg.lambda()?;
    let (n, p) = (cfg.n_ring, cfg.params);
    let problem = RadialProblem::new(lambda, n, &p)?;
    let (lower, upper) = problem
        .energy_window()
        .map_err(|e| Exit::invalid(format!("lambda: no bounded admissible orbits: {e}")))?;
    let cap = capital_lambda(lambda, n, &p)?;
    let psi_cap = cap.map(|c| problem.psi(c)).transpose()?;
    let h = cfg.h.unwrap_or(0.5 * (lower + upper));
    if !(h >= lower && h < upper) {
        let psi_cap = psi_cap.map_or("none".to_string(), |v| format!("{v:e}"));
        return Err(Exit::invalid(format!(
            "h: {h:e} outside the admissible window [{lower:e}, {upper:e}); psi(rbar) = {lower:e}, psi(Lambda) = {psi_cap}"
        ))
        .into());
    }
    let t_end = match cfg.t_end {
        Some(t) => t,
        None if h > lower => problem.radial_period(h)?,
        None => problem.harmonic_period(),
    };
    let dt = cfg.dt.unwrap_or(t_end / RADIAL_SAMPLES);
    let orbit = problem.integrate_radial(h, t_end, dt)?;
    let base = RingConfiguration::with_radius(Family::TwoPlusN, lambda, 1.0, n, p)?;
    let report = verify_homographic(&problem, &orbit, &base, false, &cfg.tolerances)?;

    let mut csv = Csv::new(&["t", "r", "r_dot", "omega"]);
    for s in &orbit.samples {
        csv.row([num(s.t), num(s.r), num(s.r_dot), num(s.omega)]);
    }
    let out = json!({
        "command": "radial",
        "lambda": lambda,
        "params": params_json(cfg),
        "h": h,
        "rbar": problem.rbar(),
        "psi_rbar": lower,
        "capital_lambda": cap,
        "psi_capital_lambda": psi_cap,
        "energy_window": [lower, upper],
        "r_min": orbit.r_min,
        "r_max": orbit.r_max,
        "period_tau": orbit.period_tau,
        "energy_drift": orbit.energy_drift,
        "samples": orbit.samples.len(),
        "report": report,
    });
    emit_data(cfg.output_path.as_deref(), &csv.into_string(), &out)?;
    Ok(if report.residual_max < cfg.tolerances.homographic_residual {
        PASS
    } else {
        FAIL
    })
}

pub fn integrate_cmd(cfg: &RunConfig) -> Result<u8> {
    let (sol, threshold) = circular_solution(cfg)?;
    let t_end = cfg.t_end.unwrap_or(sol.period());
    let settings = IntegrationSettings {
        t_end,
        sample_dt: Some(cfg.dt.unwrap_or(t_end / CIRCULAR_SAMPLES as f64)),
        ..Default::default()
    };
    let traj = integrate(&sol.circular_state_at(0.0), &cfg.params, &settings)?;
    let analytic: Vec<SystemState> = traj
        .samples
        .iter()
        .map(|s| sol.circular_state_at(s.time))
        .collect();
    let deviation = trajectory_deviation(&analytic, &traj.samples)?;

    let bodies = sol.config.body_count();
    let mut header = vec![
        "t".to_string(),
        "energy".into(),
        "lx".into(),
        "ly".into(),
        "lz".into(),
    ];
    for k in 1..=bodies {
        header.extend(["x", "y", "z"].map(|c| format!("{c}{k}")));
    }
    let mut csv = Csv::new(&header);
    for s in &traj.samples {
        let l = s.angular_momentum;
        let head = [s.time, s.energy, l.x, l.y, l.z];
        let coords = s.state.positions().flat_map(|q| [q.x, q.y, q.z]);
        csv.row(head.into_iter().chain(coords).map(num));
    }

    let tol = &cfg.tolerances;
    let passed = traj.energy_drift < tol.energy_drift
        && traj.angmom_drift < tol.angmom_drift
        && deviation < tol.circular_deviation;
    let out = json!({
        "command": "integrate",
        "family": cfg.family,
        "lambda": sol.config.lambda,
        "params": params_json(cfg),
        "threshold": threshold,
        "omega0": sol.omega0,
        "t_end": t_end,
        "steps": traj.steps,
        "energy_drift": traj.energy_drift,
        "angmom_drift": traj.angmom_drift,
        "deviation_max": deviation,
        "passed": passed,
        "tolerances": tol,
    });
    emit_data(cfg.output_path.as_deref(), &csv.into_string(), &out)?;
    Ok(if passed { PASS } else { FAIL })
}

struct SweepRow {
    lambda: f64,
    g1: f64,
    g2: f64,
    r0: f64,
    omega0_sq: f64,
    rbar: f64,
    cap: Option<f64>,
    admissible: bool,
}

fn sweep_row(cfg: &RunConfig, lambda: f64) -> lj_homographic::Result<SweepRow> {
    let (n, p, d) = (cfg.n_ring, &cfg.params, cfg.domain);
    Ok(SweepRow {
        lambda,
        g1: g_value(Family::TwoPlusN, lambda, n, p, d)?,
        g2: g_value(Family::ThreePlusN, lambda, n, p, d)?,
        r0: circular_radius_in(cfg.family, lambda, n, p, d)?,
        omega0_sq: omega0_terms_in(cfg.family, lambda, n, p, d)?.omega0_sq(),
        rbar: rbar(lambda, n, p)?,
        cap: capital_lambda(lambda, n, p)?,
        admissible: admissibility_holds(lambda, n, p)?,
    })
}

pub fn sweep_cmd(cfg: &RunConfig) -> Result<u8> {
    let grid = cfg.lambda_grid()?;
    let rows = grid
        .par_iter()
        .map(|&l| sweep_row(cfg, l))
        .collect::<lj_homographic::Result<Vec<_>>>()?;

    let mut csv = Csv::new(&[
        "lambda",
        "g1",
        "g2",
        "r0",
        "omega0_sq",
        "rbar",
        "capital_lambda",
        "admissible",
    ]);
    for r in &rows {
        csv.row([
            num(r.lambda),
            num(r.g1),
            num(r.g2),
            num(r.r0),
            num(r.omega0_sq),
            num(r.rbar),
            r.cap.map(num).unwrap_or_default(),
            r.admissible.to_string(),
        ]);
    }
    let out = json!({
        "command": "sweep",
        "family": cfg.family,
        "params": params_json(cfg),
        "lambda_min": grid[0],
        "lambda_max": grid[grid.len() - 1],
        "rows": rows.len(),
        "negative_omega0_sq": rows.iter().filter(|r| r.omega0_sq < 0.0).count(),
        "first_admissible": rows.iter().find(|r| r.admissible).map(|r| r.lambda),
    });
    emit_data(cfg.output_path.as_deref(), &csv.into_string(), &out)?;
    Ok(PASS)
}
