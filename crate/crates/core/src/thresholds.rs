//! Existence thresholds in the shape parameter `lambda`, the equilibrium
//! radius of the radial reduction, and the cap radius bounding admissible
//! radial oscillations.
//!
//! Only existence of the thresholds is known analytically, so they are
//! located numerically: a geometric grid (factor 1.5) brackets the first
//! point where the predicate holds, then bisection narrows it to
//! [`THRESHOLD_TOL`]. `lambda_1` and `lambda_2` rest on predicates that are
//! monotone in `lambda`; `lambda_0` is re-verified on a grid above the
//! candidate.

use serde::Serialize;

use crate::configurations::{check_ring, g_value, phi, theta, Family, LambdaDomain};
use crate::error::{Error, Result};
use crate::numeric::{bisect_predicate, scaled_signed_sum};
use crate::potential::PotentialParams;

/// Bisection tolerance on `lambda`.
pub const THRESHOLD_TOL: f64 = 1e-6;
/// Searches give up beyond this `lambda`.
pub const SEARCH_LIMIT: f64 = 1e6;
const GRID_FACTOR: f64 = 1.5;
/// Points on the verification grid `[lambda*, 10 lambda*]`.
const VERIFY_POINTS: usize = 200;

fn check_lambda(lambda: f64) -> Result<()> {
    LambdaDomain::Exploratory.check(lambda)
}

/// Equilibrium radius of the radial reduction (unit pole distance),
/// `(1/(2 lambda)) [beta (N 2^(beta+2) + 2 lambda^(beta+2)) / (alpha (N 2^(alpha+2) + 2 lambda^(alpha+2)))]^(1/(beta-alpha))`.
pub fn rbar(lambda: f64, n_ring: usize, params: &PotentialParams) -> Result<f64> {
    check_lambda(lambda)?;
    check_ring(n_ring)?;
    let (a, b) = (params.alpha(), params.beta());
    let n = n_ring as f64;
    let num = b * (n * 2f64.powf(b + 2.0) + 2.0 * lambda.powf(b + 2.0));
    let den = a * (n * 2f64.powf(a + 2.0) + 2.0 * lambda.powf(a + 2.0));
    Ok((num / den).powf(1.0 / (b - a)) / (2.0 * lambda))
}

/// Bracket of the cap radius divided by `(lambda phi)^(gamma+2)`:
/// `(N-2)(2/lambda)^(gamma+2) + 2 - theta_gamma (2/phi)^(gamma+2)`.
fn cap_bracket(gamma: f64, lambda: f64, n_ring: usize) -> Result<f64> {
    let f = phi(lambda);
    Ok((n_ring as f64 - 2.0) * (2.0 / lambda).powf(gamma + 2.0) + 2.0
        - theta(gamma, n_ring)? * (2.0 / f).powf(gamma + 2.0))
}

/// Cap radius
/// `(1/(2 lambda phi)) [beta B_beta / (alpha B_alpha)]^(1/(beta-alpha))`
/// with `B_g = (N-2)(2 phi)^(g+2) + 2 (lambda phi)^(g+2) - theta_g (2 lambda)^(g+2)`.
///
/// `None` when either bracket is not positive. Note this formula carries
/// the exponent in front of the `theta` terms as well; the exact zero of the
/// squared angular rate is [`crate::radial::RadialProblem::admissible_radii`].
pub fn capital_lambda(lambda: f64, n_ring: usize, params: &PotentialParams) -> Result<Option<f64>> {
    check_lambda(lambda)?;
    check_ring(n_ring)?;
    let (a, b) = (params.alpha(), params.beta());
    let sb = cap_bracket(b, lambda, n_ring)?;
    let sa = cap_bracket(a, lambda, n_ring)?;
    if !(sb > 0.0 && sa > 0.0) {
        return Ok(None);
    }
    Ok(Some(0.5 * ((b * sb) / (a * sa)).powf(1.0 / (b - a))))
}

/// Both sides of the admissibility inequality, evaluated as written:
/// `(N 2^(b+2) + 2 l^(b+2)) ((N-2) 2^(a+2) f^(b+2) + 2 l^(a+2) f^(b+2) - th_a (2l)^(a+2) f^(b-a))`
/// on the left and
/// `(N 2^(a+2) + 2 l^(a+2)) ((N-2)(2f)^(b+2) + 2 (l f)^(b+2) - th_b (2l)^(b+2))`
/// on the right. The leading terms of the two sides coincide, so for large
/// `lambda` the comparison is lost to rounding; prefer [`admissibility_margin`].
pub fn admissibility_sides(lambda: f64, n_ring: usize, params: &PotentialParams) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    check_ring(n_ring)?;
    let (a, b) = (params.alpha(), params.beta());
    let (ta, tb) = (theta(a, n_ring)?, theta(b, n_ring)?);
    let (l, f, n) = (lambda, phi(lambda), n_ring as f64);
    let lhs = (n * 2f64.powf(b + 2.0) + 2.0 * l.powf(b + 2.0))
        * ((n - 2.0) * 2f64.powf(a + 2.0) * f.powf(b + 2.0) + 2.0 * l.powf(a + 2.0) * f.powf(b + 2.0)
            - ta * (2.0 * l).powf(a + 2.0) * f.powf(b - a));
    let rhs = (n * 2f64.powf(a + 2.0) + 2.0 * l.powf(a + 2.0))
        * ((n - 2.0) * (2.0 * f).powf(b + 2.0) + 2.0 * (l * f).powf(b + 2.0) - tb * (2.0 * l).powf(b + 2.0));
    Ok((lhs, rhs))
}

/// `(rhs - lhs) / (lambda^(alpha+beta+4) phi^(beta+2))` with the common
/// leading term cancelled symbolically. Positive exactly when the
/// inequality holds.
pub fn admissibility_margin(lambda: f64, n_ring: usize, params: &PotentialParams) -> Result<f64> {
    check_lambda(lambda)?;
    check_ring(n_ring)?;
    let (a, b) = (params.alpha(), params.beta());
    let (ta, tb) = (theta(a, n_ring)?, theta(b, n_ring)?);
    let n = n_ring as f64;
    let (ll, lf, l2) = (lambda.ln(), phi(lambda).ln(), 2f64.ln());
    let mut terms = vec![
        (1.0, (a + 4.0) * l2 + (b + 2.0) * (ll + lf)),
        (1.0, ta.ln() + (a + 3.0) * l2 + (a + b + 4.0) * ll + (b - a) * lf),
        (-1.0, n.ln() + (a + 2.0) * l2 + tb.ln() + (b + 2.0) * (l2 + ll)),
        (-1.0, l2 + tb.ln() + (a + 2.0) * ll + (b + 2.0) * (l2 + ll)),
        (-1.0, n.ln() + (b + 3.0) * l2 + (a + 2.0) * ll + (b + 2.0) * lf),
        (
            1.0,
            n.ln() + ta.ln() + (b + 2.0) * l2 + (a + 2.0) * (l2 + ll) + (b - a) * lf,
        ),
    ];
    if n_ring > 2 {
        let m = (n - 2.0).ln();
        terms.extend([
            (1.0, n.ln() + m + (a + 2.0) * l2 + (b + 2.0) * (l2 + lf)),
            (1.0, l2 + m + (a + 2.0) * ll + (b + 2.0) * (l2 + lf)),
            (-1.0, n.ln() + m + (a + b + 4.0) * l2 + (b + 2.0) * lf),
        ]);
    }
    let scale = (a + b + 4.0) * ll + (b + 2.0) * lf;
    Ok(scaled_signed_sum(&terms, scale))
}

pub fn admissibility_holds(lambda: f64, n_ring: usize, params: &PotentialParams) -> Result<bool> {
    Ok(admissibility_margin(lambda, n_ring, params)? > 0.0)
}

/// Target for `G_1`: `(theta_beta / theta_alpha)^(1/(beta-alpha))`.
pub fn lambda1_target(n_ring: usize, params: &PotentialParams) -> Result<f64> {
    let (a, b) = (params.alpha(), params.beta());
    Ok((theta(b, n_ring)? / theta(a, n_ring)?).powf(1.0 / (b - a)))
}

/// Target for `G_2`: the larger of the `G_1` target and `(beta/alpha)^(1/(beta-alpha))`.
pub fn lambda2_target(n_ring: usize, params: &PotentialParams) -> Result<f64> {
    Ok(lambda1_target(n_ring, params)?.max(params.balance_distance()))
}

/// Smallest `lambda >= 2` with `pred` true, for predicates monotone in `lambda`.
fn search_from_two<P>(what: &'static str, pred: P) -> Result<f64>
where
    P: Fn(f64) -> bool,
{
    if pred(2.0) {
        return Ok(2.0);
    }
    let mut lo = 2.0;
    let mut hi = 2.0 * GRID_FACTOR;
    while !pred(hi) {
        lo = hi;
        hi *= GRID_FACTOR;
        if hi > SEARCH_LIMIT {
            return Err(Error::SearchFailure {
                what,
                limit: SEARCH_LIMIT,
            });
        }
    }
    Ok(bisect_predicate(lo, hi, THRESHOLD_TOL, pred))
}

/// Smallest `lambda >= 2` with `G_1(lambda) >= (theta_beta/theta_alpha)^(1/(beta-alpha))`.
pub fn find_lambda1(n_ring: usize, params: &PotentialParams) -> Result<f64> {
    let target = lambda1_target(n_ring, params)?;
    search_from_two("lambda_1", |l| {
        g_value(Family::TwoPlusN, l, n_ring, params, LambdaDomain::Proven).is_ok_and(|g| g >= target)
    })
}

/// Smallest `lambda >= 2` with `G_2(lambda)` above both targets.
pub fn find_lambda2(n_ring: usize, params: &PotentialParams) -> Result<f64> {
    let target = lambda2_target(n_ring, params)?;
    search_from_two("lambda_2", |l| {
        g_value(Family::ThreePlusN, l, n_ring, params, LambdaDomain::Proven).is_ok_and(|g| g >= target)
    })
}

/// Predicate behind `lambda_0`: the cap radius exists and the admissibility
/// inequality holds.
pub fn lambda0_predicate(lambda: f64, n_ring: usize, params: &PotentialParams) -> bool {
    matches!(capital_lambda(lambda, n_ring, params), Ok(Some(_)))
        && admissibility_holds(lambda, n_ring, params).unwrap_or(false)
}

fn verification_grid(start: f64) -> impl Iterator<Item = f64> {
    let ratio = 10f64.powf(1.0 / (VERIFY_POINTS - 1) as f64);
    (0..VERIFY_POINTS).map(move |i| start * ratio.powi(i as i32))
}

/// Smallest `lambda > 1` from which [`lambda0_predicate`] holds on the whole
/// verification grid `[lambda, 10 lambda]`.
pub fn find_lambda0(n_ring: usize, params: &PotentialParams) -> Result<f64> {
    check_ring(n_ring)?;
    let pred = |l: f64| lambda0_predicate(l, n_ring, params);
    let fail = || Error::SearchFailure {
        what: "lambda_0",
        limit: SEARCH_LIMIT,
    };

    // coarse grid on lambda - 1, which keeps the search off the singular point
    let mut lo = 1.0;
    let mut offset = 1e-3;
    let mut hi = 1.0 + offset;
    while !pred(hi) {
        lo = hi;
        offset *= GRID_FACTOR;
        hi = 1.0 + offset;
        if hi > SEARCH_LIMIT {
            return Err(fail());
        }
    }

    for _ in 0..64 {
        let candidate = bisect_predicate(lo, hi, THRESHOLD_TOL, pred);
        match verification_grid(candidate).filter(|&l| !pred(l)).last() {
            None => return Ok(candidate),
            Some(bad) => {
                lo = bad;
                hi = verification_grid(bad)
                    .skip(1)
                    .find(|&l| pred(l))
                    .ok_or_else(fail)?;
                if hi > SEARCH_LIMIT {
                    return Err(fail());
                }
            }
        }
    }
    Err(fail())
}

/// All three thresholds for one ring size and exponent pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda0: f64,
    pub n_ring: usize,
    pub params: PotentialParams,
    pub grid_resolution: f64,
}

impl ThresholdReport {
    pub fn compute(n_ring: usize, params: &PotentialParams) -> Result<Self> {
        Ok(Self {
            lambda1: find_lambda1(n_ring, params)?,
            lambda2: find_lambda2(n_ring, params)?,
            lambda0: find_lambda0(n_ring, params)?,
            n_ring,
            params: *params,
            grid_resolution: THRESHOLD_TOL,
        })
    }

    /// Threshold relevant to the circular solutions of `family`, never below 2.
    pub fn circular_threshold(&self, family: Family) -> f64 {
        match family {
            Family::TwoPlusN => self.lambda1.max(2.0),
            Family::ThreePlusN => self.lambda2.max(2.0),
        }
    }
}
