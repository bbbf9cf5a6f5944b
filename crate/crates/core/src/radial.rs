//! Radial reduction of the non-circular homographic family of the `2+N`
//! problem.
//!
//! With the pole half-distance normalized to one, the trajectory is
//! `q(t) = r(t) E(omega(t)) q0`. The pole equations reduce to
//! `r'' = -psi'(r)` with
//!
//! ```text
//! psi(r) = K_beta r^-beta - K_alpha r^-alpha,
//! K_g    = (N 2^(g+2) + 2 lambda^(g+2)) / (2 lambda)^(g+2),
//! ```
//!
//! and the in-plane ring equations fix the angular rate through
//! `omega_dot^2 = W_beta r^-(beta+2) - W_alpha r^-(alpha+2)`. The energy is
//! `H = r_dot^2 / 2 + psi(r)`.
//!
//! Orbits near the equilibrium `rbar` can be very narrow, so turning points,
//! energies and the integrated state are all carried as offsets from `rbar`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::configurations::{check_ring, phi, rotation, theta, Family, LambdaDomain, RingConfiguration};
use crate::error::{Error, Result};
use crate::numeric::{bisect_root, inverse_power_increment, sample_times};
use crate::ode::{Dopri5, OdeSystem};
use crate::potential::{BodyState, PotentialParams, SystemState, Vec3};
use crate::thresholds::capital_lambda;

/// Relative tolerance of the radial ODE solver.
pub const RADIAL_REL_TOL: f64 = 1e-10;
/// Energy drift (relative to `|h|`) beyond which an integration is rejected.
pub const MAX_ENERGY_DRIFT: f64 = 1e-8;
/// `omega_dot^2` values down to this are clamped to zero.
pub const ADMISSIBILITY_SLACK: f64 = 1e-12;
/// Below this angular rate the analytic `omega''` is replaced by a finite difference.
pub const OMEGA_DOT_GUARD: f64 = 1e-8;

const QUADRATURE_NODES: usize = 200;
const QUADRATURE_TOL: f64 = 1e-10;
const QUADRATURE_DOUBLINGS: usize = 14;

/// Effective radial problem at fixed shape `lambda` and ring size `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProblem {
    lambda: f64,
    n_ring: usize,
    params: PotentialParams,
    k_beta: f64,
    k_alpha: f64,
    w_beta: f64,
    w_alpha: f64,
    theta_beta: f64,
    theta_alpha: f64,
    rbar: f64,
    psi_rbar: f64,
}

/// One sample of a radial orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSample {
    pub t: f64,
    pub r: f64,
    pub r_dot: f64,
    pub omega: f64,
}

/// A sampled periodic solution of the radial system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialOrbit {
    pub lambda: f64,
    pub n_ring: usize,
    pub params: PotentialParams,
    pub h: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub period_tau: f64,
    /// Sign of the angular rate, `+1` or `-1`.
    pub omega_sign: f64,
    /// Largest `|H - h| / |h|` over the samples.
    pub energy_drift: f64,
    pub samples: Vec<RadialSample>,
}

impl RadialOrbit {
    /// Same radial motion with the rotation reversed.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.omega_sign = -self.omega_sign;
        for s in &mut out.samples {
            s.omega = -s.omega;
        }
        out
    }
}

/// Turning points of a bounded orbit, also as offsets from `rbar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurningPoints {
    pub r_min: f64,
    pub r_max: f64,
    pub x_min: f64,
    pub x_max: f64,
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "radius must be positive and finite, got {r}"
        )))
    }
}

fn check_sign(sign: f64) -> Result<()> {
    if sign == 1.0 || sign == -1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "rotation sign must be +1 or -1, got {sign}"
        )))
    }
}

impl RadialProblem {
    pub fn new(lambda: f64, n_ring: usize, params: &PotentialParams) -> Result<Self> {
        LambdaDomain::Exploratory.check(lambda)?;
        check_ring(n_ring)?;
        let (a, b) = (params.alpha(), params.beta());
        let n = n_ring as f64;
        let f = phi(lambda);
        let k = |g: f64| n * lambda.powf(-(g + 2.0)) + 2f64.powf(-(g + 1.0));
        let (theta_beta, theta_alpha) = (theta(b, n_ring)?, theta(a, n_ring)?);
        let w = |g: f64, th: f64| {
            g * (2f64.powf(-(g + 1.0)) + (n - 2.0) * lambda.powf(-(g + 2.0))) - th * f.powf(-(g + 2.0))
        };
        let (k_beta, k_alpha) = (k(b), k(a));
        let rbar = ((b * k_beta) / (a * k_alpha)).powf(1.0 / (b - a));
        let psi_rbar = k_beta * rbar.powf(-b) - k_alpha * rbar.powf(-a);
        Ok(Self {
            lambda,
            n_ring,
            params: *params,
            k_beta,
            k_alpha,
            w_beta: w(b, theta_beta),
            w_alpha: w(a, theta_alpha),
            theta_beta,
            theta_alpha,
            rbar,
            psi_rbar,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_ring(&self) -> usize {
        self.n_ring
    }

    pub fn params(&self) -> &PotentialParams {
        &self.params
    }

    /// Equilibrium radius, the unique positive zero of `psi'`.
    pub fn rbar(&self) -> f64 {
        self.rbar
    }

    /// `psi(rbar)`, the bottom of the well.
    pub fn psi_min(&self) -> f64 {
        self.psi_rbar
    }

    pub fn psi(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        let (a, b) = (self.params.alpha(), self.params.beta());
        Ok(self.k_beta * r.powf(-b) - self.k_alpha * r.powf(-a))
    }

    /// Derivative of [`Self::psi`] from its collected coefficients.
    pub fn psi_prime(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        let (a, b) = (self.params.alpha(), self.params.beta());
        Ok(-b * self.k_beta * r.powf(-(b + 1.0)) + a * self.k_alpha * r.powf(-(a + 1.0)))
    }

    /// `psi'` assembled term by term from the pole forces: ring pull at
    /// distance `lambda r` and the partner pole at distance `2r`.
    pub fn psi_prime_expanded(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        let (a, b) = (self.params.alpha(), self.params.beta());
        let (l, n) = (self.lambda, self.n_ring as f64);
        let r_ddot = n * b / (l.powf(b + 2.0) * r.powf(b + 1.0))
            - n * a / (l.powf(a + 2.0) * r.powf(a + 1.0))
            + 2.0 * b / (2f64.powf(b + 2.0) * r.powf(b + 1.0))
            - 2.0 * a / (2f64.powf(a + 2.0) * r.powf(a + 1.0));
        Ok(-r_ddot)
    }

    pub fn psi_second(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        let (a, b) = (self.params.alpha(), self.params.beta());
        Ok(b * (b + 1.0) * self.k_beta * r.powf(-(b + 2.0))
            - a * (a + 1.0) * self.k_alpha * r.powf(-(a + 2.0)))
    }

    /// Small-oscillation period `2 pi / sqrt(psi''(rbar))`.
    pub fn harmonic_period(&self) -> f64 {
        2.0 * PI / self.psi_second(self.rbar).expect("rbar is positive").sqrt()
    }

    /// `psi(rbar + x) - psi(rbar)`.
    pub fn psi_offset(&self, x: f64) -> f64 {
        let (a, b) = (self.params.alpha(), self.params.beta());
        self.k_beta * inverse_power_increment(self.rbar, x, b)
            - self.k_alpha * inverse_power_increment(self.rbar, x, a)
    }

    /// `psi'(rbar + x)`, exactly zero at `x = 0`.
    pub fn psi_prime_offset(&self, x: f64) -> f64 {
        let (a, b) = (self.params.alpha(), self.params.beta());
        -b * self.k_beta * inverse_power_increment(self.rbar, x, b + 1.0)
            + a * self.k_alpha * inverse_power_increment(self.rbar, x, a + 1.0)
    }

    /// `psi(r_end) - psi(r_end + delta)`.
    fn psi_drop(&self, r_end: f64, delta: f64) -> f64 {
        let (a, b) = (self.params.alpha(), self.params.beta());
        -(self.k_beta * inverse_power_increment(r_end, delta, b)
            - self.k_alpha * inverse_power_increment(r_end, delta, a))
    }

    /// Squared angular rate that keeps the ring on the similarity orbit,
    /// as the six-term sum of pole, ring-to-pole and ring-to-ring forces.
    pub fn omega_dot_squared(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        let (a, b) = (self.params.alpha(), self.params.beta());
        let (l, n, f) = (self.lambda, self.n_ring as f64, phi(self.lambda));
        Ok(
            (n - 2.0) * b / (l * r).powf(b + 2.0) - (n - 2.0) * a / (l * r).powf(a + 2.0)
                + 2.0 * b / (2.0 * r).powf(b + 2.0)
                - 2.0 * a / (2.0 * r).powf(a + 2.0)
                - self.theta_beta / (f * r).powf(b + 2.0)
                + self.theta_alpha / (f * r).powf(a + 2.0),
        )
    }

    /// `d(omega_dot^2)/dr`.
    pub fn omega_dot_squared_slope(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        let (a, b) = (self.params.alpha(), self.params.beta());
        Ok(-(b + 2.0) * self.w_beta * r.powf(-(b + 3.0)) + (a + 2.0) * self.w_alpha * r.powf(-(a + 3.0)))
    }

    /// Radii where `omega_dot^2 >= 0`, as a closed interval `[lo, hi]`
    /// (`lo = 0` and `hi = inf` when unbounded), or `None` if empty.
    pub fn admissible_radii(&self) -> Option<(f64, f64)> {
        let (a, b) = (self.params.alpha(), self.params.beta());
        let (wb, wa) = (self.w_beta, self.w_alpha);
        let edge = || (wb / wa).powf(1.0 / (b - a));
        match (wb > 0.0, wa > 0.0) {
            (true, true) => Some((0.0, edge())),
            (true, false) => Some((0.0, f64::INFINITY)),
            (false, true) => None,
            (false, false) if wa < 0.0 => Some((edge(), f64::INFINITY)),
            (false, false) => (wb == 0.0).then_some((0.0, f64::INFINITY)),
        }
    }

    /// Largest radius with `omega_dot^2 >= 0`, if bounded.
    pub fn exact_cap(&self) -> Option<f64> {
        self.admissible_radii()
            .map(|(_, hi)| hi)
            .filter(|hi| hi.is_finite())
    }

    /// Open energy interval of admissible bounded orbits: above `psi(rbar)`,
    /// below zero, below `psi` at the cap radius, and below `psi` at every
    /// edge of the set where `omega_dot^2 >= 0`.
    pub fn energy_window(&self) -> Result<(f64, f64)> {
        let lower = self.psi_rbar;
        let mut upper = 0.0_f64;
        if let Some(cap) = capital_lambda(self.lambda, self.n_ring, &self.params)? {
            if cap <= self.rbar {
                return Err(Error::Domain(format!(
                    "cap radius {cap} does not exceed rbar = {} at lambda = {}",
                    self.rbar, self.lambda
                )));
            }
            upper = upper.min(self.psi(cap)?);
        }
        let (lo, hi) = self.admissible_radii().ok_or_else(|| {
            Error::Domain(format!(
                "omega_dot^2 < 0 for every radius at lambda = {}",
                self.lambda
            ))
        })?;
        if !(lo < self.rbar && self.rbar < hi) {
            return Err(Error::Domain(format!(
                "rbar = {} lies outside the admissible radii [{lo}, {hi}]",
                self.rbar
            )));
        }
        if hi.is_finite() {
            upper = upper.min(self.psi(hi)?);
        }
        if lo > 0.0 {
            upper = upper.min(self.psi(lo)?);
        }
        if upper <= lower {
            return Err(Error::Domain(format!(
                "empty energy window at lambda = {}",
                self.lambda
            )));
        }
        Ok((lower, upper))
    }

    /// Turning points of the bounded orbit at energy `h`, for
    /// `psi(rbar) < h < 0`. Both are bisected to machine precision in their
    /// offset from `rbar`.
    pub fn turning_points(&self, h: f64) -> Result<TurningPoints> {
        if !(h > self.psi_rbar && h < 0.0) {
            return Err(Error::EnergyWindow {
                h,
                lower: self.psi_rbar,
                upper: 0.0,
            });
        }
        self.turning_points_offset(h - self.psi_rbar)
    }

    fn turning_points_offset(&self, de: f64) -> Result<TurningPoints> {
        let f = |x: f64| self.psi_offset(x) - de;
        let mut x_lo = -0.5 * self.rbar;
        while f(x_lo) <= 0.0 {
            x_lo = 0.5 * (x_lo - self.rbar);
            if self.rbar + x_lo <= f64::MIN_POSITIVE {
                return Err(Error::Domain("inner turning point not bracketed".into()));
            }
        }
        let mut x_hi = self.rbar;
        while f(x_hi) <= 0.0 {
            x_hi *= 2.0;
            if !x_hi.is_finite() {
                return Err(Error::Domain("outer turning point not bracketed".into()));
            }
        }
        let x_min = bisect_root(x_lo, 0.0, f).expect("bracketed");
        let x_max = bisect_root(0.0, x_hi, f).expect("bracketed");
        Ok(TurningPoints {
            r_min: self.rbar + x_min,
            r_max: self.rbar + x_max,
            x_min,
            x_max,
        })
    }

    /// Period `2 * int_{r_min}^{r_max} dr / sqrt(2 (h - psi(r)))` with
    /// `r = c + d sin(theta)`, which makes the integrand smooth and periodic
    /// so the midpoint rule converges quickly. Nodes double from 200 until
    /// successive estimates agree to `1e-10` relative.
    pub fn radial_period(&self, h: f64) -> Result<f64> {
        let tp = self.turning_points(h)?;
        let de = h - self.psi_rbar;
        let d = 0.5 * (tp.x_max - tp.x_min);
        let integrand = |t: f64| {
            let (s, c) = t.sin_cos();
            // distance to the nearer turning point, free of cancellation
            let (drop, resid) = if t >= 0.0 {
                let delta = d * c * c / (1.0 + s);
                (self.psi_drop(tp.r_max, -delta), de - self.psi_offset(tp.x_max))
            } else {
                let delta = d * c * c / (1.0 - s);
                (self.psi_drop(tp.r_min, delta), de - self.psi_offset(tp.x_min))
            };
            d * c / (2.0 * (drop + resid)).sqrt()
        };
        let rule = |nodes: usize| {
            let w = PI / nodes as f64;
            2.0 * w
                * (0..nodes)
                    .map(|i| integrand(-0.5 * PI + (i as f64 + 0.5) * w))
                    .sum::<f64>()
        };
        let mut nodes = QUADRATURE_NODES;
        let mut prev = rule(nodes);
        for _ in 0..QUADRATURE_DOUBLINGS {
            nodes *= 2;
            let next = rule(nodes);
            if !next.is_finite() {
                break;
            }
            if (next - prev).abs() <= QUADRATURE_TOL * next.abs() {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::SearchFailure {
            what: "period quadrature",
            limit: nodes as f64,
        })
    }

    fn solver_scales(&self, x: f64, v: f64) -> (f64, f64) {
        let freq = self.psi_second(self.rbar).expect("rbar is positive").sqrt();
        let amp = x.abs().max(v.abs() / freq);
        let amp = if amp > 0.0 { amp } else { self.rbar * f64::EPSILON };
        (amp, freq)
    }

    /// State `(r, r_dot)` after evolving `(r, r_dot)` for `duration >= 0`.
    pub fn propagate(&self, r: f64, r_dot: f64, duration: f64) -> Result<(f64, f64)> {
        check_radius(r)?;
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::Domain(format!(
                "duration must be nonnegative, got {duration}"
            )));
        }
        let x = r - self.rbar;
        let (amp, freq) = self.solver_scales(x, r_dot);
        let sys = ScaledRadial {
            problem: self,
            amp,
            freq,
        };
        let mut solver = Dopri5::new(
            &sys,
            0.0,
            &[x / amp, r_dot / (amp * freq)],
            RADIAL_REL_TOL,
            1e-12,
            PI / freq,
        )?;
        solver.advance_to(duration)?;
        let y = solver.y();
        Ok((self.rbar + amp * y[0], amp * freq * y[1]))
    }

    /// Time for the orbit started at rest at `r_min` to return there, located
    /// as the next upward zero crossing of `r_dot`.
    pub fn first_return_time(&self, h: f64) -> Result<f64> {
        let tp = self.turning_points(h)?;
        let horizon = 100.0 * self.radial_period(h)?;
        let (amp, freq) = self.solver_scales(tp.x_min, 0.0);
        let sys = ScaledRadial {
            problem: self,
            amp,
            freq,
        };
        let mut solver = Dopri5::new(
            &sys,
            0.0,
            &[tp.x_min / amp, 0.0],
            RADIAL_REL_TOL,
            1e-12,
            PI / freq,
        )?;
        let mut moved_out = false;
        while solver.t() < horizon {
            let (t0, y0) = (solver.t(), solver.y().to_vec());
            let step = solver.step(horizon - t0)?;
            let v = solver.y()[1];
            if v > 0.0 {
                moved_out = true;
            }
            if moved_out && y0[1] < 0.0 && v >= 0.0 {
                solver.reset(t0, &y0)?;
                let s = bisect_root(0.0, step, |s| {
                    if s == 0.0 {
                        return y0[1];
                    }
                    solver.peek(s).map(|y| y[1]).unwrap_or(f64::NAN)
                })
                .unwrap_or(step);
                return Ok(t0 + s);
            }
        }
        Err(Error::IntegrationFailure {
            time: solver.t(),
            reason: "no return to the inner turning point".into(),
        })
    }

    /// Integrates from rest at `r_min` and samples every `dt` up to `t_end`.
    /// `h` must lie in [`Self::energy_window`]; `h = psi(rbar)` gives the
    /// equilibrium orbit.
    pub fn integrate_radial(&self, h: f64, t_end: f64, dt: f64) -> Result<RadialOrbit> {
        if !(t_end > 0.0 && t_end.is_finite() && dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!(
                "need t_end > 0 and dt > 0, got {t_end}, {dt}"
            )));
        }
        let times = sample_times(t_end, dt);
        let de = h - self.psi_rbar;
        let (lower, upper) = self.energy_window()?;
        if de < 0.0 || h >= upper {
            return Err(Error::EnergyWindow { h, lower, upper });
        }
        let mut samples = Vec::with_capacity(times.len());
        let (tp, period, drift) = if de == 0.0 {
            samples.extend(times.iter().map(|&t| RadialSample {
                t,
                r: self.rbar,
                r_dot: 0.0,
                omega: 0.0,
            }));
            let tp = TurningPoints {
                r_min: self.rbar,
                r_max: self.rbar,
                x_min: 0.0,
                x_max: 0.0,
            };
            (tp, self.harmonic_period(), 0.0)
        } else {
            let tp = self.turning_points(h)?;
            let period = self.radial_period(h)?;
            let (amp, freq) = self.solver_scales(tp.x_min, 0.0);
            let sys = ScaledRadial {
                problem: self,
                amp,
                freq,
            };
            let mut solver = Dopri5::new(
                &sys,
                0.0,
                &[tp.x_min / amp, 0.0],
                RADIAL_REL_TOL,
                1e-12,
                PI / freq,
            )?;
            let mut drift = 0.0_f64;
            for &t in &times {
                solver.advance_to(t)?;
                let y = solver.y();
                let (x, v) = (amp * y[0], amp * freq * y[1]);
                let err = (0.5 * v * v + self.psi_offset(x) - de).abs() / h.abs();
                if err > MAX_ENERGY_DRIFT {
                    return Err(Error::IntegrationFailure {
                        time: t,
                        reason: format!("energy drift {err:e} exceeds {MAX_ENERGY_DRIFT:e}"),
                    });
                }
                drift = drift.max(err);
                samples.push(RadialSample {
                    t,
                    r: self.rbar + x,
                    r_dot: v,
                    omega: 0.0,
                });
            }
            (tp, period, drift)
        };
        let omega = self.omega_profile(&samples, 1.0)?;
        for (s, w) in samples.iter_mut().zip(omega) {
            s.omega = w;
        }
        Ok(RadialOrbit {
            lambda: self.lambda,
            n_ring: self.n_ring,
            params: self.params,
            h,
            r_min: tp.r_min,
            r_max: tp.r_max,
            period_tau: period,
            omega_sign: 1.0,
            energy_drift: drift,
            samples,
        })
    }

    /// `omega(t) = sign * int_0^t sqrt(omega_dot^2(r(s))) ds` on the sample
    /// grid, by the trapezoid rule with its derivative end correction.
    pub fn omega_profile(&self, samples: &[RadialSample], sign: f64) -> Result<Vec<f64>> {
        check_sign(sign)?;
        let mut rate = Vec::with_capacity(samples.len());
        for s in samples {
            let w2 = self.omega_dot_squared(s.r)?;
            if w2 < -ADMISSIBILITY_SLACK {
                return Err(Error::Admissibility {
                    time: s.t,
                    r: s.r,
                    value: w2,
                });
            }
            let g = w2.max(0.0).sqrt();
            let slope = (g >= OMEGA_DOT_GUARD)
                .then(|| self.omega_dot_squared_slope(s.r).map(|d| d * s.r_dot / (2.0 * g)))
                .transpose()?;
            rate.push((g, slope));
        }
        let mut out = Vec::with_capacity(samples.len());
        let mut acc = 0.0;
        for i in 0..samples.len() {
            if i > 0 {
                let dt = samples[i].t - samples[i - 1].t;
                let ((g0, d0), (g1, d1)) = (rate[i - 1], rate[i]);
                acc += 0.5 * dt * (g0 + g1);
                if let (Some(d0), Some(d1)) = (d0, d1) {
                    acc += dt * dt / 12.0 * (d0 - d1);
                }
            }
            out.push(sign * acc);
        }
        Ok(out)
    }

    fn check_base(&self, orbit: &RadialOrbit, base: &RingConfiguration) -> Result<()> {
        if base.family != Family::TwoPlusN {
            return Err(Error::Domain(
                "the radial family needs a 2+N base configuration".into(),
            ));
        }
        if (base.r0 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "base configuration must have r0 = 1, got {}",
                base.r0
            )));
        }
        if base.lambda != orbit.lambda || base.n_ring != orbit.n_ring || base.params != orbit.params {
            return Err(Error::Domain(
                "base configuration does not match the orbit".into(),
            ));
        }
        if self.lambda != orbit.lambda || self.n_ring != orbit.n_ring || self.params != orbit.params {
            return Err(Error::Domain(
                "orbit belongs to a different radial problem".into(),
            ));
        }
        Ok(())
    }

    fn angular_rate(&self, r: f64, sign: f64) -> Result<f64> {
        Ok(sign * self.omega_dot_squared(r)?.max(0.0).sqrt())
    }

    /// Full states `r(t) E(omega(t)) q0` with product-rule velocities.
    pub fn reconstruct_homographic(
        &self,
        orbit: &RadialOrbit,
        base: &RingConfiguration,
    ) -> Result<Vec<SystemState>> {
        self.check_base(orbit, base)?;
        let q0 = base.positions();
        orbit
            .samples
            .iter()
            .map(|s| {
                let e = rotation(s.omega);
                let wd = self.angular_rate(s.r, orbit.omega_sign)?;
                let bodies = q0
                    .iter()
                    .map(|q| {
                        let p = e * q;
                        let jp = Vec3::new(-p.y, p.x, 0.0);
                        BodyState::new(s.r * p, s.r_dot * p + s.r * wd * jp)
                    })
                    .collect();
                Ok(SystemState::from_trusted(bodies, s.t))
            })
            .collect()
    }

    /// Analytic second derivatives of the reconstructed trajectory,
    /// `r'' p + (2 r' w' + r w'') J p + r w'^2 J^2 p` with `p = E q0`,
    /// `r'' = -psi'(r)` and `w''` from the chain rule through `omega_dot^2`.
    pub fn homographic_accelerations(
        &self,
        orbit: &RadialOrbit,
        base: &RingConfiguration,
    ) -> Result<Vec<Vec<Vec3>>> {
        self.check_base(orbit, base)?;
        let q0 = base.positions();
        let s = &orbit.samples;
        let rates = s
            .iter()
            .map(|x| self.angular_rate(x.r, orbit.omega_sign))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::with_capacity(s.len());
        for (i, x) in s.iter().enumerate() {
            let wd = rates[i];
            let wdd = if wd.abs() >= OMEGA_DOT_GUARD {
                orbit.omega_sign * self.omega_dot_squared_slope(x.r)? * x.r_dot / (2.0 * wd.abs())
            } else if i + 1 < s.len() {
                (rates[i + 1] - wd) / (s[i + 1].t - x.t)
            } else if i > 0 {
                (wd - rates[i - 1]) / (x.t - s[i - 1].t)
            } else {
                0.0
            };
            let rdd = -self.psi_prime(x.r)?;
            let e = rotation(x.omega);
            out.push(
                q0.iter()
                    .map(|q| {
                        let p = e * q;
                        let jp = Vec3::new(-p.y, p.x, 0.0);
                        let jjp = Vec3::new(-p.x, -p.y, 0.0);
                        rdd * p + (2.0 * x.r_dot * wd + x.r * wdd) * jp + x.r * wd * wd * jjp
                    })
                    .collect(),
            );
        }
        Ok(out)
    }
}

/// Radial ODE in units where the oscillation amplitude and the harmonic
/// frequency are one: `y = (x / amp, v / (amp freq))`.
struct ScaledRadial<'a> {
    problem: &'a RadialProblem,
    amp: f64,
    freq: f64,
}

impl OdeSystem for ScaledRadial<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let x = self.amp * y[0];
        if self.problem.rbar + x <= 0.0 {
            return Err(Error::IntegrationFailure {
                time: t,
                reason: "radius collapsed to zero".into(),
            });
        }
        dy[0] = self.freq * y[1];
        dy[1] = -self.problem.psi_prime_offset(x) / (self.amp * self.freq);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configurations::{circular_radius, omega0};
    use crate::thresholds::rbar;
    use approx::assert_relative_eq;

    fn lj() -> PotentialParams {
        PotentialParams::lennard_jones()
    }

    fn problem(lambda: f64) -> RadialProblem {
        RadialProblem::new(lambda, 2, &lj()).unwrap()
    }

    /// Problem with a comfortably wide energy window.
    fn wide() -> RadialProblem {
        RadialProblem::new(3.0, 2, &PotentialParams::new(1.0, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn psi_limits() {
        let p = problem(2.0);
        let far = p.psi(1e6).unwrap();
        assert!(far < 0.0 && far > -1e-30);
        assert!(p.psi(1e-3).unwrap() > 1e20);
        assert!(p.psi(p.rbar()).unwrap() < 0.0);
        assert!(p.psi(0.0).is_err());
    }

    #[test]
    fn rbar_is_the_critical_point() {
        for &l in &[2.0, 3.0, 10.0] {
            let p = problem(l);
            assert!(p.psi_prime(p.rbar()).unwrap().abs() < 1e-10);
            assert_relative_eq!(p.rbar(), rbar(l, 2, &lj()).unwrap(), max_relative = 1e-14);
            let r0 = circular_radius(l, 2, &lj(), Family::TwoPlusN).unwrap();
            assert_relative_eq!(p.rbar(), r0, max_relative = 1e-14);
        }
    }

    #[test]
    fn collected_and_expanded_forms_agree() {
        for &(l, n) in &[(2.0, 2), (3.5, 5), (10.0, 8)] {
            let p = RadialProblem::new(l, n, &PotentialParams::new(2.0, 3.0).unwrap()).unwrap();
            for &r in &[0.3, 0.7, 1.0, 2.5, 9.0] {
                let a = p.psi_prime(r).unwrap();
                let b = p.psi_prime_expanded(r).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn psi_prime_matches_finite_difference() {
        let p = problem(3.0);
        for &r in &[0.4, 0.6, 0.9, 1.7] {
            let step = 1e-6 * r;
            let fd = (p.psi(r + step).unwrap() - p.psi(r - step).unwrap()) / (2.0 * step);
            assert_relative_eq!(fd, p.psi_prime(r).unwrap(), max_relative = 1e-6);
        }
    }

    #[test]
    fn angular_rate_at_rbar_is_circular_speed() {
        let p = problem(2.0);
        let w0 = omega0(2.0, 2, &lj(), Family::TwoPlusN).unwrap();
        assert_relative_eq!(
            p.omega_dot_squared(p.rbar()).unwrap(),
            w0 * w0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn angular_rate_for_two_ring_bodies() {
        let p = problem(4.0);
        let f = phi(4.0);
        let (t6, t12) = (theta(6.0, 2).unwrap(), theta(12.0, 2).unwrap());
        for &r in &[0.5_f64, 0.8] {
            let four = 24.0 / (2.0 * r).powi(14) - 12.0 / (2.0 * r).powi(8) - t12 / (f * r).powi(14)
                + t6 / (f * r).powi(8);
            assert_relative_eq!(p.omega_dot_squared(r).unwrap(), four, max_relative = 1e-12);
        }
    }

    #[test]
    fn exact_cap_is_the_sign_change() {
        let p = problem(10.0);
        let cap = p.exact_cap().unwrap();
        assert!(p.omega_dot_squared(cap).unwrap().abs() < 1e-9);
        assert!(p.omega_dot_squared(cap * 0.999).unwrap() > 0.0);
        assert!(p.omega_dot_squared(cap * 1.001).unwrap() < 0.0);
        assert!(cap > p.rbar());
    }

    #[test]
    fn turning_points_contract() {
        let p = wide();
        let (lo, hi) = p.energy_window().unwrap();
        let h = 0.5 * (lo + hi);
        let tp = p.turning_points(h).unwrap();
        assert!(tp.r_min < p.rbar() && p.rbar() < tp.r_max);
        assert!((p.psi(tp.r_min).unwrap() - h).abs() < 1e-10);
        assert!((p.psi(tp.r_max).unwrap() - h).abs() < 1e-10);
        assert!(tp.r_max < p.exact_cap().unwrap_or(f64::INFINITY));
        assert!(matches!(
            p.turning_points(lo - 1e-3),
            Err(Error::EnergyWindow { .. })
        ));
        assert!(p.turning_points(1e-3).is_err());
    }

    #[test]
    fn turning_points_near_the_bottom() {
        let p = problem(2.0);
        let eps = 1e-12 * p.psi_min().abs();
        let tp = p.turning_points(p.psi_min() + eps).unwrap();
        let scale = (2.0 * eps / p.psi_second(p.rbar()).unwrap()).sqrt();
        assert!(-tp.x_min < 2.0 * scale && tp.x_max < 2.0 * scale);
        assert!(-tp.x_min > 0.5 * scale && tp.x_max > 0.5 * scale);
    }

    #[test]
    fn period_harmonic_limit_and_growth() {
        let p = wide();
        let h = p.psi_min() + 1e-6 * p.psi_min().abs();
        let tau = p.radial_period(h).unwrap();
        assert_relative_eq!(tau, p.harmonic_period(), max_relative = 1e-2);
        let taus: Vec<f64> = [0.5, 0.2, 0.05]
            .iter()
            .map(|f| p.radial_period(f * p.psi_min()).unwrap())
            .collect();
        assert!(taus[0] < taus[1] && taus[1] < taus[2]);
    }

    #[test]
    fn period_matches_first_return() {
        let p = wide();
        let (lo, hi) = p.energy_window().unwrap();
        let h = 0.5 * (lo + hi);
        let tau = p.radial_period(h).unwrap();
        let ret = p.first_return_time(h).unwrap();
        assert_relative_eq!(tau, ret, max_relative = 1e-8);
    }

    #[test]
    fn integration_conserves_energy_and_stays_between_turning_points() {
        let p = wide();
        let (lo, hi) = p.energy_window().unwrap();
        let h = 0.5 * (lo + hi);
        let tau = p.radial_period(h).unwrap();
        let orbit = p.integrate_radial(h, 3.0 * tau, tau / 200.0).unwrap();
        assert!(orbit.energy_drift < 1e-8);
        let rmin = orbit.samples.iter().map(|s| s.r).fold(f64::INFINITY, f64::min);
        let rmax = orbit.samples.iter().map(|s| s.r).fold(0.0, f64::max);
        assert!((rmin - orbit.r_min).abs() < 1e-6);
        assert!((rmax - orbit.r_max).abs() < 1e-6);
        assert!(orbit.samples.windows(2).all(|w| w[1].omega > w[0].omega));
    }

    #[test]
    fn time_reversal() {
        let p = wide();
        let (lo, hi) = p.energy_window().unwrap();
        let tp = p.turning_points(0.5 * (lo + hi)).unwrap();
        let t = 1.7;
        let (r1, v1) = p.propagate(tp.r_min, 0.0, t).unwrap();
        let (r2, v2) = p.propagate(r1, -v1, t).unwrap();
        assert!((r2 - tp.r_min).abs() < 1e-8);
        assert!(v2.abs() < 1e-8);
    }

    #[test]
    fn equilibrium_orbit_rotates_uniformly() {
        let p = problem(2.0);
        let orbit = p.integrate_radial(p.psi_min(), 10.0, 0.5).unwrap();
        let rate = p.omega_dot_squared(p.rbar()).unwrap().sqrt();
        for s in &orbit.samples {
            assert_eq!(s.r, p.rbar());
            assert_eq!(s.r_dot, 0.0);
            assert_relative_eq!(s.omega, rate * s.t, max_relative = 1e-14);
        }
        let rev = p.omega_profile(&orbit.samples, -1.0).unwrap();
        assert_relative_eq!(rev[20], -rate * 10.0, max_relative = 1e-14);
        assert!(p.omega_profile(&orbit.samples, 0.5).is_err());
    }

    #[test]
    fn energy_below_the_well_is_rejected() {
        let p = wide();
        let err = p.integrate_radial(p.psi_min() - 1e-3, 1.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::EnergyWindow { .. }));
    }

    #[test]
    fn equilibrium_orbit_reconstructs_the_circular_solution() {
        let p = problem(2.0);
        let orbit = p.integrate_radial(p.psi_min(), 5.0, 0.5).unwrap();
        let base = RingConfiguration::with_radius(Family::TwoPlusN, 2.0, 1.0, 2, lj()).unwrap();
        let states = p.reconstruct_homographic(&orbit, &base).unwrap();
        let sol = crate::configurations::CircularSolution::new(Family::TwoPlusN, 2.0, 2, &lj()).unwrap();
        for st in &states {
            let exact = sol.circular_state_at(st.time());
            for (a, b) in st.bodies().iter().zip(exact.bodies()) {
                assert!((a.position - b.position).norm() < 1e-12);
                assert!((a.velocity - b.velocity).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn reconstruction_is_homographic() {
        let p = RadialProblem::new(3.0, 2, &PotentialParams::new(1.0, 2.0).unwrap()).unwrap();
        let (lo, hi) = p.energy_window().unwrap();
        let orbit = p.integrate_radial(0.5 * (lo + hi), 4.0, 0.25).unwrap();
        let base = RingConfiguration::with_radius(Family::TwoPlusN, 3.0, 1.0, 2, *p.params()).unwrap();
        let states = p.reconstruct_homographic(&orbit, &base).unwrap();
        let d =
            |s: &SystemState, i: usize, j: usize| (s.bodies()[i].position - s.bodies()[j].position).norm();
        let ratio0 = d(&states[0], 0, 2) / d(&states[0], 2, 3);
        for s in &states {
            for pole in &s.bodies()[..2] {
                assert_eq!(pole.position.x, 0.0);
                assert_eq!(pole.position.y, 0.0);
            }
            assert_relative_eq!(d(s, 0, 2) / d(s, 2, 3), ratio0, max_relative = 1e-12);
        }
        let wrong = RingConfiguration::with_radius(Family::TwoPlusN, 3.0, 2.0, 2, *p.params()).unwrap();
        assert!(p.reconstruct_homographic(&orbit, &wrong).is_err());
    }
}
