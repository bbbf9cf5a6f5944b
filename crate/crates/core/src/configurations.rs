//! Two-pole-plus-ring configurations and their circular (rigidly rotating)
//! solutions.
//!
//! Bodies are ordered poles first: `Q1 = (0,0,r0)`, `Q2 = (0,0,-r0)`, then
//! the central body `Q3 = 0` for the (3+N) family, then ring body `k` at
//! `phi(lambda) r0 (cos w_k, sin w_k, 0)` with `w_k = 2 pi k / N`,
//! `k = 1..=N`, and `phi(lambda) = sqrt(lambda^2 - 1)`. Every ring body is
//! at distance `lambda r0` from each pole.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{BodyState, PotentialParams, SystemState, Vec3};

/// Which configuration family: two poles plus ring, or two poles, a central
/// body and a ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "2N")]
    TwoPlusN,
    #[serde(rename = "3N")]
    ThreePlusN,
}

impl Family {
    /// Number of non-ring bodies.
    pub fn core_bodies(self) -> usize {
        match self {
            Family::TwoPlusN => 2,
            Family::ThreePlusN => 3,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::TwoPlusN => "2N",
            Family::ThreePlusN => "3N",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "2N" | "2+N" | "TWOPLUSN" => Ok(Family::TwoPlusN),
            "3N" | "3+N" | "THREEPLUSN" => Ok(Family::ThreePlusN),
            other => Err(Error::Domain(format!(
                "unknown family {other:?}, expected 2N or 3N"
            ))),
        }
    }
}

/// Range of the shape parameter a computation accepts.
///
/// `Proven` is `lambda >= 2`, where the pole bracket of the angular speed
/// is known to be nonnegative. `Exploratory` widens this to `lambda > 1`
/// and carries no existence guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LambdaDomain {
    #[default]
    Proven,
    Exploratory,
}

impl LambdaDomain {
    pub fn check(self, lambda: f64) -> Result<()> {
        if !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda must be finite, got {lambda}")));
        }
        match self {
            LambdaDomain::Proven if lambda < 2.0 => Err(Error::Domain(format!(
                "lambda = {lambda} is below 2; use the exploratory domain for 1 < lambda < 2"
            ))),
            LambdaDomain::Exploratory if lambda <= 1.0 => {
                Err(Error::Domain(format!("lambda = {lambda} must exceed 1")))
            }
            _ => Ok(()),
        }
    }
}

pub(crate) fn check_ring(n_ring: usize) -> Result<()> {
    if n_ring < 2 {
        return Err(Error::Domain(format!(
            "ring needs at least 2 bodies, got {n_ring}"
        )));
    }
    Ok(())
}

/// `phi(lambda) = sqrt(lambda^2 - 1)`.
#[inline]
pub fn phi(lambda: f64) -> f64 {
    ((lambda - 1.0) * (lambda + 1.0)).sqrt()
}

/// Ring self-interaction constant
/// `theta_gamma = (gamma/2) sum_{j=1}^{N-1} |1 - exp(i 2 pi j / N)|^-gamma`.
pub fn theta(gamma: f64, n_ring: usize) -> Result<f64> {
    check_ring(n_ring)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    let n = n_ring as f64;
    let sum: f64 = (1..n_ring)
        .map(|j| (2.0 * (PI * j as f64 / n).sin()).powf(-gamma))
        .sum();
    Ok(0.5 * gamma * sum)
}

/// `ln` of the family bracket divided by `lambda^(gamma+2)`; the factored
/// form keeps large `lambda` from overflowing.
fn ln_reduced_bracket(family: Family, gamma: f64, lambda: f64, n_ring: usize) -> f64 {
    let tail = n_ring as f64 * (2.0 / lambda).powf(gamma + 2.0);
    match family {
        Family::TwoPlusN => (2.0 + tail).ln(),
        Family::ThreePlusN => (2f64.powf(gamma + 2.0) + 2.0 + tail).ln(),
    }
}

/// Pole half-distance `r0` that balances the forces on the poles.
fn balanced_radius(family: Family, lambda: f64, n_ring: usize, params: &PotentialParams) -> f64 {
    let (a, b) = (params.alpha(), params.beta());
    let ln_ratio = (b / a).ln() + ln_reduced_bracket(family, b, lambda, n_ring)
        - ln_reduced_bracket(family, a, lambda, n_ring);
    0.5 * (ln_ratio / (b - a)).exp()
}

/// `G_family(lambda) = phi(lambda) r0(lambda)` on the chosen domain.
pub fn g_value(
    family: Family,
    lambda: f64,
    n_ring: usize,
    params: &PotentialParams,
    domain: LambdaDomain,
) -> Result<f64> {
    domain.check(lambda)?;
    check_ring(n_ring)?;
    Ok(phi(lambda) * balanced_radius(family, lambda, n_ring, params))
}

/// `G_1(lambda)` for the (2+N) family, `lambda >= 2`.
pub fn g1(lambda: f64, n_ring: usize, params: &PotentialParams) -> Result<f64> {
    g_value(Family::TwoPlusN, lambda, n_ring, params, LambdaDomain::Proven)
}

/// `G_2(lambda)` for the (3+N) family, `lambda >= 2`.
pub fn g2(lambda: f64, n_ring: usize, params: &PotentialParams) -> Result<f64> {
    g_value(Family::ThreePlusN, lambda, n_ring, params, LambdaDomain::Proven)
}

/// Pole half-distance `r0 = G(lambda) / phi(lambda)` on the chosen domain.
pub fn circular_radius_in(
    family: Family,
    lambda: f64,
    n_ring: usize,
    params: &PotentialParams,
    domain: LambdaDomain,
) -> Result<f64> {
    Ok(g_value(family, lambda, n_ring, params, domain)? / phi(lambda))
}

pub fn circular_radius(lambda: f64, n_ring: usize, params: &PotentialParams, family: Family) -> Result<f64> {
    circular_radius_in(family, lambda, n_ring, params, LambdaDomain::Proven)
}

/// The two brackets making up `omega0^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Omega0Terms {
    /// Ring self-interaction plus (for 3+N) the central body, in `phi r0`.
    pub ring: f64,
    /// Pole-ring interaction, in `lambda r0`.
    pub pole: f64,
}

impl Omega0Terms {
    pub fn omega0_sq(&self) -> f64 {
        self.ring + self.pole
    }
}

pub fn omega0_terms_in(
    family: Family,
    lambda: f64,
    n_ring: usize,
    params: &PotentialParams,
    domain: LambdaDomain,
) -> Result<Omega0Terms> {
    let r0 = circular_radius_in(family, lambda, n_ring, params, domain)?;
    let (a, b) = (params.alpha(), params.beta());
    let (mut ta, mut tb) = (theta(a, n_ring)?, theta(b, n_ring)?);
    if family == Family::ThreePlusN {
        ta += a;
        tb += b;
    }
    let ring_dist = phi(lambda) * r0;
    let pole_dist = lambda * r0;
    Ok(Omega0Terms {
        ring: ta * ring_dist.powf(-(a + 2.0)) - tb * ring_dist.powf(-(b + 2.0)),
        pole: 2.0 * a * pole_dist.powf(-(a + 2.0)) - 2.0 * b * pole_dist.powf(-(b + 2.0)),
    })
}

/// Positive angular speed of the circular solution; callers negate for the
/// opposite sense of rotation.
pub fn omega0_in(
    family: Family,
    lambda: f64,
    n_ring: usize,
    params: &PotentialParams,
    domain: LambdaDomain,
) -> Result<f64> {
    let w2 = omega0_terms_in(family, lambda, n_ring, params, domain)?.omega0_sq();
    if w2 < 0.0 {
        return Err(Error::ExistenceViolation { omega0_sq: w2 });
    }
    Ok(w2.sqrt())
}

pub fn omega0(lambda: f64, n_ring: usize, params: &PotentialParams, family: Family) -> Result<f64> {
    omega0_in(family, lambda, n_ring, params, LambdaDomain::Proven)
}

/// Rotation about the z-axis by `angle` radians.
pub fn rotation(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// A pole-plus-ring configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingConfiguration {
    pub family: Family,
    pub lambda: f64,
    pub r0: f64,
    pub n_ring: usize,
    pub params: PotentialParams,
}

impl RingConfiguration {
    /// Configuration with an arbitrary pole half-distance, e.g. the unit
    /// normalization used for the non-circular family.
    pub fn with_radius(
        family: Family,
        lambda: f64,
        r0: f64,
        n_ring: usize,
        params: PotentialParams,
    ) -> Result<Self> {
        LambdaDomain::Exploratory.check(lambda)?;
        check_ring(n_ring)?;
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::Domain(format!("r0 must be positive, got {r0}")));
        }
        Ok(Self {
            family,
            lambda,
            r0,
            n_ring,
            params,
        })
    }

    pub fn phi(&self) -> f64 {
        phi(self.lambda)
    }

    pub fn body_count(&self) -> usize {
        self.family.core_bodies() + self.n_ring
    }

    /// Index of the first ring body.
    pub fn ring_start(&self) -> usize {
        self.family.core_bodies()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.body_count());
        out.push(Vec3::new(0.0, 0.0, self.r0));
        out.push(Vec3::new(0.0, 0.0, -self.r0));
        if self.family == Family::ThreePlusN {
            out.push(Vec3::zeros());
        }
        let radius = self.phi() * self.r0;
        let n = self.n_ring as f64;
        for k in 1..=self.n_ring {
            let w = 2.0 * PI * k as f64 / n;
            out.push(Vec3::new(radius * w.cos(), radius * w.sin(), 0.0));
        }
        out
    }

    /// The configuration with all bodies at rest.
    pub fn state(&self) -> Result<SystemState> {
        SystemState::new(
            self.positions().into_iter().map(BodyState::at_rest).collect(),
            0.0,
        )
    }
}

/// Configuration for the circular solution at shape `lambda`.
pub fn build_configuration_in(
    family: Family,
    lambda: f64,
    n_ring: usize,
    params: &PotentialParams,
    domain: LambdaDomain,
) -> Result<RingConfiguration> {
    let r0 = circular_radius_in(family, lambda, n_ring, params, domain)?;
    RingConfiguration::with_radius(family, lambda, r0, n_ring, *params)
}

pub fn build_configuration(
    family: Family,
    lambda: f64,
    n_ring: usize,
    params: &PotentialParams,
) -> Result<RingConfiguration> {
    build_configuration_in(family, lambda, n_ring, params, LambdaDomain::Proven)
}

/// A rigidly rotating solution `q(t) = E(omega0 t) q0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircularSolution {
    pub config: RingConfiguration,
    pub omega0: f64,
}

impl CircularSolution {
    pub fn new(family: Family, lambda: f64, n_ring: usize, params: &PotentialParams) -> Result<Self> {
        Self::new_in(family, lambda, n_ring, params, LambdaDomain::Proven)
    }

    pub fn new_in(
        family: Family,
        lambda: f64,
        n_ring: usize,
        params: &PotentialParams,
        domain: LambdaDomain,
    ) -> Result<Self> {
        let config = build_configuration_in(family, lambda, n_ring, params, domain)?;
        let omega0 = omega0_in(family, lambda, n_ring, params, domain)?;
        Ok(Self { config, omega0 })
    }

    /// Time for one full revolution; infinite when `omega0 = 0`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega0.abs()
    }

    /// Same solution rotating the other way.
    pub fn reversed(&self) -> Self {
        Self {
            omega0: -self.omega0,
            ..*self
        }
    }

    pub fn circular_state_at(&self, t: f64) -> SystemState {
        let e = rotation(self.omega0 * t);
        let bodies = self
            .config
            .positions()
            .into_iter()
            .map(|q| {
                let p = e * q;
                BodyState::new(p, Vec3::new(-self.omega0 * p.y, self.omega0 * p.x, 0.0))
            })
            .collect();
        SystemState::from_trusted(bodies, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lj() -> PotentialParams {
        PotentialParams::lennard_jones()
    }

    #[test]
    fn theta_small_rings() {
        assert_relative_eq!(theta(6.0, 2).unwrap(), 0.046875, max_relative = 1e-14);
        assert_relative_eq!(theta(12.0, 2).unwrap(), 12.0 / 8192.0, max_relative = 1e-14);
        assert_relative_eq!(theta(6.0, 3).unwrap(), 6.0 / 27.0, max_relative = 1e-14);
        assert!(theta(6.0, 1).is_err());
        assert!(theta(0.0, 3).is_err());
    }

    #[test]
    fn g1_closed_form_at_two() {
        let expected = 3f64.sqrt() / 4.0 * 2f64.powf(7.0 / 6.0);
        assert_relative_eq!(g1(2.0, 2, &lj()).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 0.972_080_648_619_832_8, max_relative = 1e-14);
    }

    #[test]
    fn g_domain() {
        assert!(matches!(g1(1.5, 2, &lj()), Err(Error::Domain(_))));
        assert!(g_value(Family::TwoPlusN, 1.5, 2, &lj(), LambdaDomain::Exploratory).is_ok());
        assert!(g_value(Family::TwoPlusN, 1.0, 2, &lj(), LambdaDomain::Exploratory).is_err());
        assert!(g2(3.0, 1, &lj()).is_err());
    }

    #[test]
    fn g_monotone_and_divergent() {
        let p = lj();
        assert!(g1(3.0, 2, &p).unwrap() > g1(2.0, 2, &p).unwrap());
        assert!(g2(3.0, 2, &p).unwrap() > g2(2.0, 2, &p).unwrap());
        assert!(g1(1e3, 2, &p).unwrap() > 1e2);
        assert!(g2(1e3, 2, &p).unwrap() > 1e2);
    }

    #[test]
    fn radius_at_two() {
        let p = lj();
        let r0 = circular_radius(2.0, 2, &p, Family::TwoPlusN).unwrap();
        assert_relative_eq!(r0, 2f64.powf(-5.0 / 6.0), max_relative = 1e-14);
        assert_relative_eq!(r0 * 3f64.sqrt(), g1(2.0, 2, &p).unwrap(), max_relative = 1e-14);
        // equality case of lambda r0 >= (beta/alpha)^(1/(beta-alpha))
        assert_relative_eq!(2.0 * r0, p.balance_distance(), max_relative = 1e-14);
    }

    #[test]
    fn omega0_at_two() {
        let terms = omega0_terms_in(Family::TwoPlusN, 2.0, 2, &lj(), LambdaDomain::Proven).unwrap();
        assert!(terms.pole.abs() < 1e-12);
        assert!(terms.ring >= 0.0);
        let w = omega0(2.0, 2, &lj(), Family::TwoPlusN).unwrap();
        assert!((w * w - 0.056_615_126_681_994_5).abs() < 1e-12);
        assert_relative_eq!(w, 0.237_939_334_037_049_3, max_relative = 1e-12);
    }

    #[test]
    fn configuration_geometry() {
        let c = build_configuration(Family::TwoPlusN, 2.0, 2, &lj()).unwrap();
        let q = c.positions();
        assert_eq!(q.len(), 4);
        let r0 = c.r0;
        assert_relative_eq!(q[0], Vec3::new(0.0, 0.0, r0));
        assert_relative_eq!(q[1], Vec3::new(0.0, 0.0, -r0));
        // k = 1 at angle pi, k = 2 at angle 2 pi
        assert_relative_eq!(q[2], Vec3::new(-3f64.sqrt() * r0, 0.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(q[3], Vec3::new(3f64.sqrt() * r0, 0.0, 0.0), epsilon = 1e-15);
        for k in 2..4 {
            for pole in 0..2 {
                assert_relative_eq!((q[k] - q[pole]).norm(), 2.0 * r0, max_relative = 1e-14);
            }
        }
        assert!(c.state().unwrap().center_of_mass().norm() < 1e-15);

        let c3 = build_configuration(Family::ThreePlusN, 2.5, 4, &lj()).unwrap();
        let q3 = c3.positions();
        assert_eq!(q3.len(), 7);
        assert_eq!(q3[2], Vec3::zeros());
        assert_eq!(q3.iter().filter(|p| p.norm() == 0.0).count(), 1);
    }

    #[test]
    fn rotation_group() {
        assert_relative_eq!(rotation(0.0), Matrix3::identity());
        let r = rotation(PI / 2.0);
        assert_relative_eq!(r * Vec3::x(), Vec3::y(), epsilon = 1e-15);
        assert_relative_eq!(r * Vec3::z(), Vec3::z());
        let (a, b) = (0.7, -2.3);
        assert_relative_eq!(rotation(a) * rotation(b), rotation(a + b), epsilon = 1e-14);
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(r * r.transpose(), Matrix3::identity(), epsilon = 1e-15);
    }

    #[test]
    fn circular_state_revolution() {
        let sol = CircularSolution::new(Family::TwoPlusN, 2.0, 2, &lj()).unwrap();
        let s0 = sol.circular_state_at(0.0);
        for b in &s0.bodies()[..2] {
            assert_eq!(b.velocity, Vec3::zeros());
        }
        let s1 = sol.circular_state_at(sol.period());
        for (a, b) in s0.bodies().iter().zip(s1.bodies()) {
            assert!((a.position - b.position).norm() < 1e-12);
            assert!((a.velocity - b.velocity).norm() < 1e-12);
        }
        let st = sol.circular_state_at(3.7);
        let d =
            |s: &SystemState, i: usize, j: usize| (s.bodies()[i].position - s.bodies()[j].position).norm();
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert!((d(&s0, i, j) - d(&st, i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn family_parsing() {
        assert_eq!("2N".parse::<Family>().unwrap(), Family::TwoPlusN);
        assert_eq!("3n".parse::<Family>().unwrap(), Family::ThreePlusN);
        assert!("4N".parse::<Family>().is_err());
    }
}
