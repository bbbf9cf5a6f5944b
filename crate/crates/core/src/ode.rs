//! Explicit Runge-Kutta steppers: the Dormand-Prince 5(4) embedded pair with
//! step-size control, and the classical fixed-step fourth-order method.

use crate::error::{Error, Result};

/// First-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()>;
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 50_000_000;

/// Adaptive Dormand-Prince 5(4) integrator holding the current state.
pub struct Dopri5<'a, S: OdeSystem> {
    sys: &'a S,
    t: f64,
    y: Vec<f64>,
    f: Vec<f64>,
    h: f64,
    rtol: f64,
    atol: f64,
    max_step: f64,
    steps: usize,
    rejected: usize,
    ks: [Vec<f64>; 6],
    tmp: Vec<f64>,
    err: Vec<f64>,
}

impl<'a, S: OdeSystem> Dopri5<'a, S> {
    pub fn new(sys: &'a S, t0: f64, y0: &[f64], rtol: f64, atol: f64, max_step: f64) -> Result<Self> {
        let n = sys.dim();
        if y0.len() != n {
            return Err(Error::Domain(format!(
                "state has length {}, system expects {n}",
                y0.len()
            )));
        }
        if !(rtol > 0.0 && atol > 0.0 && max_step > 0.0) {
            return Err(Error::Domain("tolerances and max_step must be positive".into()));
        }
        let mut f = vec![0.0; n];
        sys.rhs(t0, y0, &mut f)?;
        let mut solver = Self {
            sys,
            t: t0,
            y: y0.to_vec(),
            f,
            h: 0.0,
            rtol,
            atol,
            max_step,
            steps: 0,
            rejected: 0,
            ks: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            err: vec![0.0; n],
        };
        solver.h = solver.initial_step();
        Ok(solver)
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.t
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Derivative at the current state.
    #[inline]
    pub fn dydt(&self) -> &[f64] {
        &self.f
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    fn scale(&self, i: usize, y_new: f64) -> f64 {
        self.atol + self.rtol * self.y[i].abs().max(y_new.abs())
    }

    fn initial_step(&self) -> f64 {
        let n = self.y.len() as f64;
        let sc = |i: usize| self.atol + self.rtol * self.y[i].abs();
        let d0 = (self
            .y
            .iter()
            .enumerate()
            .map(|(i, v)| (v / sc(i)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let d1 = (self
            .f
            .iter()
            .enumerate()
            .map(|(i, v)| (v / sc(i)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h.min(self.max_step)
    }

    /// One trial step of size `h` from the current state. Fills `tmp` with
    /// the fifth-order solution, `err` with the error estimate, and `ks[5]`
    /// with the derivative at the new point.
    fn trial(&mut self, h: f64) -> Result<()> {
        stages(
            self.sys,
            self.t,
            &self.y,
            &self.f,
            h,
            &mut self.ks,
            &mut self.tmp,
            &mut self.err,
        )
    }

    fn error_norm(&self) -> f64 {
        let n = self.y.len() as f64;
        let sum: f64 = (0..self.y.len())
            .map(|i| (self.err[i] / self.scale(i, self.tmp[i])).powi(2))
            .sum();
        (sum / n).sqrt()
    }

    /// Takes one accepted step no longer than `limit`. Returns its size.
    pub fn step(&mut self, limit: f64) -> Result<f64> {
        let mut h = self.h.min(self.max_step).min(limit);
        loop {
            if self.steps + self.rejected > MAX_STEPS {
                return Err(Error::IntegrationFailure {
                    time: self.t,
                    reason: "step budget exhausted".into(),
                });
            }
            if h < 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::IntegrationFailure {
                    time: self.t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
            self.trial(h)?;
            let err = self.error_norm();
            if !err.is_finite() {
                self.rejected += 1;
                h *= MIN_FACTOR;
                continue;
            }
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if err <= 1.0 {
                self.t += h;
                std::mem::swap(&mut self.y, &mut self.tmp);
                std::mem::swap(&mut self.f, &mut self.ks[5]);
                self.steps += 1;
                // keep the proposal for the next call even when this step was clamped
                self.h = (h * factor).max(self.h.min(h));
                return Ok(h);
            }
            self.rejected += 1;
            h *= factor.min(1.0);
        }
    }

    /// Advances exactly to `t_end`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end {
            let remaining = t_end - self.t;
            let h = self.step(remaining)?;
            if remaining - h <= 1e-15 * t_end.abs().max(1.0) {
                self.t = t_end;
            }
        }
        Ok(())
    }

    /// Fifth-order solution one step of size `h` ahead, without accepting it
    /// or checking its error. Used to locate events inside an accepted step.
    pub fn peek(&self, h: f64) -> Result<Vec<f64>> {
        let n = self.y.len();
        let mut ks: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; n]);
        let (mut tmp, mut err) = (vec![0.0; n], vec![0.0; n]);
        stages(self.sys, self.t, &self.y, &self.f, h, &mut ks, &mut tmp, &mut err)?;
        Ok(tmp)
    }

    /// Replaces the current state, e.g. after locating an event.
    pub fn reset(&mut self, t: f64, y: &[f64]) -> Result<()> {
        self.t = t;
        self.y.copy_from_slice(y);
        self.sys.rhs(t, &self.y, &mut self.f)
    }
}

#[allow(clippy::too_many_arguments)]
fn stages<S: OdeSystem>(
    sys: &S,
    t: f64,
    y: &[f64],
    f: &[f64],
    h: f64,
    ks: &mut [Vec<f64>; 6],
    tmp: &mut [f64],
    err: &mut [f64],
) -> Result<()> {
    let n = y.len();
    let [k2, k3, k4, k5, k6, k7] = ks;
    for i in 0..n {
        tmp[i] = y[i] + h * A21 * f[i];
    }
    sys.rhs(t + C2 * h, tmp, k2)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * f[i] + A32 * k2[i]);
    }
    sys.rhs(t + C3 * h, tmp, k3)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * f[i] + A42 * k2[i] + A43 * k3[i]);
    }
    sys.rhs(t + C4 * h, tmp, k4)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * f[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    sys.rhs(t + C5 * h, tmp, k5)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A61 * f[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    sys.rhs(t + h, tmp, k6)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A71 * f[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    sys.rhs(t + h, tmp, k7)?;
    for i in 0..n {
        err[i] = h * (E1 * f[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok(())
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<S: OdeSystem>(sys: &S, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    sys.rhs(t, y, &mut k1)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    sys.rhs(t + 0.5 * h, &tmp, &mut k2)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    sys.rhs(t + 0.5 * h, &tmp, &mut k3)?;
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    sys.rhs(t + h, &tmp, &mut k4)?;
    Ok((0..n)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}
