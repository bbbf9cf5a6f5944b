//! Numerical judges for the analytic solutions: equilibrium residuals,
//! deviation from direct integration, and geometric classification.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::configurations::{CircularSolution, RingConfiguration};
use crate::error::{Error, Result};
use crate::integrator::{angular_momentum, integrate_at, IntegrationSettings, TrajectorySample};
use crate::numeric::sample_times;
use crate::potential::{gradient, PotentialParams, SystemState, Vec3};
use crate::radial::{RadialOrbit, RadialProblem};

/// Spatial character of a sampled trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// One fixed plane holds every body at every instant.
    Planar,
    /// Coplanar at each instant, but the plane moves.
    FlatNonplanar,
    /// Not coplanar at some instant.
    Spatial,
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Geometry::Planar => "planar",
            Geometry::FlatNonplanar => "flat_nonplanar",
            Geometry::Spatial => "spatial",
        })
    }
}

/// Thresholds used by the verification routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub circular_residual: f64,
    pub homographic_residual: f64,
    pub coplanarity: f64,
    pub rhombus: f64,
    pub energy_drift: f64,
    pub angmom_drift: f64,
    pub circular_deviation: f64,
    pub homographic_deviation: f64,
    pub shape: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            circular_residual: 1e-10,
            homographic_residual: 1e-6,
            coplanarity: 1e-9,
            rhombus: 1e-9,
            energy_drift: 1e-8,
            angmom_drift: 1e-9,
            circular_deviation: 1e-6,
            homographic_deviation: 1e-5,
            shape: 1e-9,
        }
    }
}

impl Tolerances {
    /// Overrides one threshold by field name.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain(format!(
                "tolerance {key} must be positive, got {value}"
            )));
        }
        let slot = match key {
            "circular_residual" => &mut self.circular_residual,
            "homographic_residual" => &mut self.homographic_residual,
            "coplanarity" => &mut self.coplanarity,
            "rhombus" => &mut self.rhombus,
            "energy_drift" => &mut self.energy_drift,
            "angmom_drift" => &mut self.angmom_drift,
            "circular_deviation" => &mut self.circular_deviation,
            "homographic_deviation" => &mut self.homographic_deviation,
            "shape" => &mut self.shape,
            _ => return Err(Error::Domain(format!("unknown tolerance {key:?}"))),
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub residual_max: f64,
    pub energy_drift: f64,
    pub angmom_drift: f64,
    pub geometry: Geometry,
    pub shape_preserved: bool,
    /// Largest distance from a direct integration, when one was run.
    pub deviation_max: Option<f64>,
    pub passed: bool,
    pub tolerances: Tolerances,
}

fn max_norm(v: &[Vec3]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `max_k |diag(-w^2, -w^2, 0) q_k + dU/dq_k| / max(1, max_k |dU/dq_k|)`.
pub fn equilibrium_residual(state: &SystemState, omega: f64, params: &PotentialParams) -> Result<f64> {
    let grad = gradient(state, params)?;
    let w2 = omega * omega;
    let res = state
        .positions()
        .zip(&grad)
        .map(|(q, g)| (Vec3::new(-w2 * q.x, -w2 * q.y, 0.0) + g).norm())
        .fold(0.0, f64::max);
    Ok(res / max_norm(&grad).max(1.0))
}

/// Relative-equilibrium residual of a circular solution at `t = 0`.
pub fn circular_residual(sol: &CircularSolution) -> Result<f64> {
    equilibrium_residual(&sol.config.state()?, sol.omega0, &sol.config.params)
}

/// Largest position distance between matching samples of two trajectories.
pub fn trajectory_deviation(analytic: &[SystemState], integrated: &[TrajectorySample]) -> Result<f64> {
    if analytic.len() != integrated.len() {
        return Err(Error::GridMismatch(format!(
            "{} analytic samples vs {} integrated",
            analytic.len(),
            integrated.len()
        )));
    }
    let mut worst = 0.0_f64;
    for (a, b) in analytic.iter().zip(integrated) {
        if (a.time() - b.time).abs() > 1e-12 * a.time().abs().max(1.0) {
            return Err(Error::GridMismatch(format!("t = {} vs t = {}", a.time(), b.time)));
        }
        if a.len() != b.state.len() {
            return Err(Error::BodyCount {
                expected: a.len(),
                found: b.state.len(),
            });
        }
        for (p, q) in a.positions().zip(b.state.positions()) {
            worst = worst.max((p - q).norm());
        }
    }
    Ok(worst)
}

fn diameter(points: &[Vec3]) -> f64 {
    let mut d = 0.0_f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            d = d.max((p - q).norm());
        }
    }
    d
}

/// Smallest singular value of the centered point cloud over `scale`.
fn flatness(points: &[Vec3], scale: f64) -> f64 {
    if points.len() < 4 || scale == 0.0 {
        return 0.0;
    }
    let c: Vec3 = points.iter().sum::<Vec3>() / points.len() as f64;
    let m = DMatrix::from_fn(points.len(), 3, |i, j| points[i][j] - c[j]);
    let sv = m.singular_values();
    sv.min() / scale
}

/// Classifies a sampled trajectory as planar, flat non-planar or spatial,
/// with coplanarity judged by the smallest singular value of the centered
/// positions relative to the configuration diameter.
pub fn classify_geometry(states: &[SystemState], tol: f64) -> Result<Geometry> {
    if states.is_empty() {
        return Err(Error::Domain("cannot classify an empty trajectory".into()));
    }
    let mut all = Vec::new();
    let mut scale = 0.0_f64;
    for s in states {
        let pts: Vec<Vec3> = s.positions().collect();
        let d = diameter(&pts);
        if flatness(&pts, d) >= tol {
            return Ok(Geometry::Spatial);
        }
        scale = scale.max(d);
        all.extend(pts);
    }
    let stacked = flatness(&all, scale * (states.len() as f64).sqrt());
    Ok(if stacked < tol {
        Geometry::Planar
    } else {
        Geometry::FlatNonplanar
    })
}

fn equal_sides(p: &[Vec3; 4], tol: f64) -> bool {
    let sides: Vec<f64> = (0..4).map(|i| (p[i] - p[(i + 1) % 4]).norm()).collect();
    let hi = sides.iter().copied().fold(0.0, f64::max);
    let lo = sides.iter().copied().fold(f64::INFINITY, f64::min);
    hi > 0.0 && hi - lo <= tol * hi
}

/// True when four outer bodies form a planar rhombus and, with
/// `with_center`, the remaining body sits where its diagonals cross.
pub fn rhombus_check(state: &SystemState, with_center: bool, tol: f64) -> Result<bool> {
    let expected = if with_center { 5 } else { 4 };
    if state.len() != expected {
        return Err(Error::BodyCount {
            expected,
            found: state.len(),
        });
    }
    let mut pts: Vec<Vec3> = state.positions().collect();
    let d = diameter(&pts);
    let center = if with_center {
        let c: Vec3 = pts.iter().sum::<Vec3>() / pts.len() as f64;
        let k = (0..pts.len())
            .min_by(|&i, &j| (pts[i] - c).norm().total_cmp(&(pts[j] - c).norm()))
            .expect("five bodies");
        Some(pts.remove(k))
    } else {
        None
    };
    if flatness(&pts, d) >= tol {
        return Ok(false);
    }
    for order in [[0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3]] {
        let quad = order.map(|i| pts[i]);
        if !equal_sides(&quad, tol) {
            continue;
        }
        let Some(c) = center else { return Ok(true) };
        let (m1, m2) = ((quad[0] + quad[2]) / 2.0, (quad[1] + quad[3]) / 2.0);
        return Ok((c - m1).norm() <= tol * d && (c - m2).norm() <= tol * d);
    }
    Ok(false)
}

/// True when every pairwise distance keeps a fixed ratio to the first one.
pub fn shape_preserved(states: &[SystemState], tol: f64) -> bool {
    let ratios = |s: &SystemState| -> Vec<f64> {
        let p: Vec<Vec3> = s.positions().collect();
        let mut d = Vec::new();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                d.push((p[i] - p[j]).norm());
            }
        }
        let first = d[0];
        d.into_iter().map(|x| x / first).collect()
    };
    let Some(s0) = states.first() else { return true };
    let r0 = ratios(s0);
    states.iter().all(|s| {
        ratios(s)
            .iter()
            .zip(&r0)
            .all(|(a, b)| (a - b).abs() <= tol * b.abs())
    })
}

/// Residual of the equations of motion along a reconstructed orbit,
/// `max |q'' + grad U| / max(1, |grad U|)` over the samples.
pub fn homographic_residual(
    problem: &RadialProblem,
    orbit: &RadialOrbit,
    base: &RingConfiguration,
) -> Result<f64> {
    let states = problem.reconstruct_homographic(orbit, base)?;
    let accs = problem.homographic_accelerations(orbit, base)?;
    let mut worst = 0.0_f64;
    for (s, acc) in states.iter().zip(&accs) {
        let grad = gradient(s, problem.params())?;
        let res = acc
            .iter()
            .zip(&grad)
            .map(|(a, g)| (a + g).norm())
            .fold(0.0, f64::max);
        worst = worst.max(res / max_norm(&grad).max(1.0));
    }
    Ok(worst)
}

fn angmom_drift(states: &[SystemState]) -> f64 {
    let l0 = states.first().map(angular_momentum).unwrap_or_else(Vec3::zeros);
    let scale = if l0.norm() > 0.0 { l0.norm() } else { 1.0 };
    states
        .iter()
        .map(|s| (angular_momentum(s) - l0).norm() / scale)
        .fold(0.0, f64::max)
}

/// Checks a circular solution: equilibrium residual, geometry over one
/// revolution, and deviation from a direct integration of that revolution.
pub fn verify_circular(
    sol: &CircularSolution,
    samples: usize,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let params = sol.config.params;
    let residual = circular_residual(sol)?;
    let period = sol.period();
    let times = sample_times(period, period / samples.max(1) as f64);
    let analytic: Vec<SystemState> = times.iter().map(|&t| sol.circular_state_at(t)).collect();
    let traj = integrate_at(&analytic[0], &params, &IntegrationSettings::default(), &times)?;
    let deviation = trajectory_deviation(&analytic, &traj.samples)?;
    let geometry = classify_geometry(&analytic, tol.coplanarity)?;
    let shape = shape_preserved(&analytic, tol.shape);
    let passed = residual < tol.circular_residual
        && traj.energy_drift < tol.energy_drift
        && traj.angmom_drift < tol.angmom_drift
        && deviation < tol.circular_deviation
        && shape;
    Ok(VerificationReport {
        residual_max: residual,
        energy_drift: traj.energy_drift,
        angmom_drift: traj.angmom_drift,
        geometry,
        shape_preserved: shape,
        deviation_max: Some(deviation),
        passed,
        tolerances: *tol,
    })
}

/// Checks a reconstructed non-circular orbit: equations-of-motion residual,
/// radial energy conservation, geometry, and (optionally) deviation from a
/// direct integration started at the orbit's first state.
pub fn verify_homographic(
    problem: &RadialProblem,
    orbit: &RadialOrbit,
    base: &RingConfiguration,
    integrate: bool,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let residual = homographic_residual(problem, orbit, base)?;
    let states = problem.reconstruct_homographic(orbit, base)?;
    let deviation = if integrate {
        let times: Vec<f64> = states.iter().map(|s| s.time()).collect();
        let traj = integrate_at(
            &states[0],
            problem.params(),
            &IntegrationSettings::default(),
            &times,
        )?;
        Some(trajectory_deviation(&states, &traj.samples)?)
    } else {
        None
    };
    let geometry = classify_geometry(&states, tol.coplanarity)?;
    let shape = shape_preserved(&states, tol.shape);
    let passed = residual < tol.homographic_residual
        && orbit.energy_drift < tol.energy_drift
        && deviation.is_none_or(|d| d < tol.homographic_deviation);
    Ok(VerificationReport {
        residual_max: residual,
        energy_drift: orbit.energy_drift,
        angmom_drift: angmom_drift(&states),
        geometry,
        shape_preserved: shape,
        deviation_max: deviation,
        passed,
        tolerances: *tol,
    })
}
