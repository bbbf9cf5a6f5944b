//! Generalized Lennard-Jones interaction between unit-mass bodies.
//!
//! Every pair at distance `d` contributes `d^-beta - d^-alpha` to the
//! potential energy, with `0 < alpha < beta`. Masses are fixed to one, so
//! accelerations are minus the gradient of the total energy.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Separations below this are treated as collisions.
pub const SINGULARITY_CUTOFF: f64 = 1e-12;

/// Tolerance on the center of mass when validating a state.
pub const CENTER_OF_MASS_TOL: f64 = 1e-9;

pub type Vec3 = Vector3<f64>;

/// Exponent pair `(alpha, beta)` of the generalized potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    alpha: f64,
    beta: f64,
}

impl PotentialParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Domain(format!(
                "exponents must be finite, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if !(0.0 < alpha && alpha < beta) {
            return Err(Error::Domain(format!(
                "exponents must satisfy 0 < alpha < beta, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// The classical 6-12 pair.
    pub fn lennard_jones() -> Self {
        Self {
            alpha: 6.0,
            beta: 12.0,
        }
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Distance at which a pair feels no force, `(beta/alpha)^(1/(beta-alpha))`.
    pub fn balance_distance(&self) -> f64 {
        (self.beta / self.alpha).powf(1.0 / (self.beta - self.alpha))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BodyState {
    pub position: Vec3,
    pub velocity: Vec3,
}

impl BodyState {
    pub fn new(position: Vec3, velocity: Vec3) -> Self {
        Self { position, velocity }
    }

    pub fn at_rest(position: Vec3) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
        }
    }
}

/// Positions and velocities of all bodies at one instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemState {
    bodies: Vec<BodyState>,
    time: f64,
}

impl SystemState {
    /// Builds a validated state: at least two bodies, finite components,
    /// no collisions, and center of mass at the origin.
    pub fn new(bodies: Vec<BodyState>, time: f64) -> Result<Self> {
        if bodies.len() < 2 {
            return Err(Error::BodyCount {
                expected: 2,
                found: bodies.len(),
            });
        }
        if !time.is_finite() {
            return Err(Error::Domain(format!("time must be finite, got {time}")));
        }
        for (k, b) in bodies.iter().enumerate() {
            if !(b.position.iter().all(|c| c.is_finite()) && b.velocity.iter().all(|c| c.is_finite())) {
                return Err(Error::Domain(format!("body {k} has non-finite components")));
            }
        }
        let state = Self { bodies, time };
        state.check_collisions()?;
        let com = state.center_of_mass();
        if com.norm() > CENTER_OF_MASS_TOL {
            return Err(Error::Domain(format!(
                "center of mass {:e} away from the origin",
                com.norm()
            )));
        }
        Ok(state)
    }

    /// Shifts positions so the center of mass sits at the origin, then validates.
    pub fn centered(mut bodies: Vec<BodyState>, time: f64) -> Result<Self> {
        if !bodies.is_empty() {
            let com = bodies.iter().map(|b| b.position).sum::<Vec3>() / bodies.len() as f64;
            for b in &mut bodies {
                b.position -= com;
            }
        }
        Self::new(bodies, time)
    }

    /// Skips validation; used for states produced by trusted propagation.
    pub(crate) fn from_trusted(bodies: Vec<BodyState>, time: f64) -> Self {
        Self { bodies, time }
    }

    #[inline]
    pub fn bodies(&self) -> &[BodyState] {
        &self.bodies
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = Vec3> + '_ {
        self.bodies.iter().map(|b| b.position)
    }

    pub fn center_of_mass(&self) -> Vec3 {
        self.positions().sum::<Vec3>() / self.bodies.len() as f64
    }

    /// Applies a linear map to every position and velocity.
    pub fn transformed(&self, map: &nalgebra::Matrix3<f64>) -> Self {
        let bodies = self
            .bodies
            .iter()
            .map(|b| BodyState::new(map * b.position, map * b.velocity))
            .collect();
        Self::from_trusted(bodies, self.time)
    }

    fn check_collisions(&self) -> Result<()> {
        for i in 0..self.bodies.len() {
            for j in (i + 1)..self.bodies.len() {
                separation(&self.bodies, i, j)?;
            }
        }
        Ok(())
    }
}

fn separation(bodies: &[BodyState], i: usize, j: usize) -> Result<(Vec3, f64)> {
    let diff = bodies[i].position - bodies[j].position;
    let d = diff.norm();
    if d.is_nan() || d < SINGULARITY_CUTOFF {
        return Err(Error::Singularity { i, j, distance: d });
    }
    Ok((diff, d))
}

/// Scalar multiplying `(q_k - q_j)` in the pairwise force on body `k`:
/// `beta d^-(beta+2) - alpha d^-(alpha+2)`.
pub fn pair_kernel(d: f64, params: &PotentialParams) -> Result<f64> {
    if !d.is_finite() || d <= 0.0 {
        return Err(Error::Domain(format!(
            "distance must be finite and positive, got {d}"
        )));
    }
    if d < SINGULARITY_CUTOFF {
        return Err(Error::Singularity {
            i: 0,
            j: 1,
            distance: d,
        });
    }
    Ok(kernel_unchecked(d, params))
}

#[inline]
pub(crate) fn kernel_unchecked(d: f64, params: &PotentialParams) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    b * d.powf(-(b + 2.0)) - a * d.powf(-(a + 2.0))
}

#[inline]
fn pair_energy(d: f64, params: &PotentialParams) -> f64 {
    d.powf(-params.beta) - d.powf(-params.alpha)
}

/// `dU_pair/dd`, the radial derivative of one pair's energy.
#[inline]
fn pair_energy_slope(d: f64, params: &PotentialParams) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    (a * d.powf(-a) - b * d.powf(-b)) / d
}

pub fn potential_energy(state: &SystemState, params: &PotentialParams) -> Result<f64> {
    let bodies = state.bodies();
    let mut total = 0.0;
    for i in 0..bodies.len() {
        for j in (i + 1)..bodies.len() {
            let (_, d) = separation(bodies, i, j)?;
            total += pair_energy(d, params);
        }
    }
    Ok(total)
}

/// `dU/dq_k` for every body, by the chain rule through each pair distance.
pub fn gradient(state: &SystemState, params: &PotentialParams) -> Result<Vec<Vec3>> {
    let bodies = state.bodies();
    let mut grad = vec![Vec3::zeros(); bodies.len()];
    for i in 0..bodies.len() {
        for j in (i + 1)..bodies.len() {
            let (diff, d) = separation(bodies, i, j)?;
            let g = diff * (pair_energy_slope(d, params) / d);
            grad[i] += g;
            grad[j] -= g;
        }
    }
    Ok(grad)
}

/// Accelerations `-grad U`.
pub fn accelerations(state: &SystemState, params: &PotentialParams) -> Result<Vec<Vec3>> {
    Ok(gradient(state, params)?.into_iter().map(|g| -g).collect())
}

/// Accelerations assembled directly from the pairwise equations of motion,
/// `sum_j kernel(|q_kj|) (q_k - q_j)`. Kept separate from [`accelerations`]
/// so the two can be compared.
pub fn accelerations_pairwise(state: &SystemState, params: &PotentialParams) -> Result<Vec<Vec3>> {
    let bodies = state.bodies();
    let mut acc = vec![Vec3::zeros(); bodies.len()];
    for (k, acc_k) in acc.iter_mut().enumerate() {
        for j in 0..bodies.len() {
            if j == k {
                continue;
            }
            let (diff, d) = separation(bodies, k, j)?;
            *acc_k += diff * kernel_unchecked(d, params);
        }
    }
    Ok(acc)
}

/// Writes pairwise accelerations for a flat position buffer `[x0,y0,z0,x1,...]`.
/// Used on the integrator's hot path.
pub(crate) fn accelerations_flat(positions: &[f64], params: &PotentialParams, out: &mut [f64]) -> Result<()> {
    let n = positions.len() / 3;
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = positions[3 * i] - positions[3 * j];
            let dy = positions[3 * i + 1] - positions[3 * j + 1];
            let dz = positions[3 * i + 2] - positions[3 * j + 2];
            let d = (dx * dx + dy * dy + dz * dz).sqrt();
            if d.is_nan() || d < SINGULARITY_CUTOFF {
                return Err(Error::Singularity { i, j, distance: d });
            }
            let k = kernel_unchecked(d, params);
            out[3 * i] += k * dx;
            out[3 * i + 1] += k * dy;
            out[3 * i + 2] += k * dz;
            out[3 * j] -= k * dx;
            out[3 * j + 1] -= k * dy;
            out[3 * j + 2] -= k * dz;
        }
    }
    Ok(())
}
