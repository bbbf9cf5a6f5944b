//! Bracketing helpers shared by the threshold searches and the radial solver.

/// Narrows `[lo, hi]`, where `pred(lo)` is false and `pred(hi)` is true,
/// until `hi - lo <= tol`. Returns the `true` end.
pub fn bisect_predicate<P>(mut lo: f64, mut hi: f64, tol: f64, pred: P) -> f64
where
    P: Fn(f64) -> bool,
{
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Root of `f` in `[lo, hi]` by bisection, run until the bracket cannot be
/// split further in floating point. `f(lo)` and `f(hi)` must differ in sign
/// (zero counts as either).
pub fn bisect_root<F>(mut lo: f64, mut hi: f64, f: F) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return None;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `x^-p - y^-p` without cancellation when `x` is close to `y`.
#[inline]
pub fn inverse_power_difference(x: f64, y: f64, p: f64) -> f64 {
    inverse_power_increment(y, x - y, p)
}

/// `(y + delta)^-p - y^-p` for an offset `delta` known more accurately than
/// `y + delta` itself.
#[inline]
pub fn inverse_power_increment(y: f64, delta: f64, p: f64) -> f64 {
    y.powf(-p) * (-p * (delta / y).ln_1p()).exp_m1()
}

/// Sum of signed terms given as `(sign, ln|term|)`, each scaled by `exp(-ln_scale)`.
pub fn scaled_signed_sum(terms: &[(f64, f64)], ln_scale: f64) -> f64 {
    terms.iter().map(|&(s, ln)| s * (ln - ln_scale).exp()).sum()
}

/// Grid `0, dt, 2 dt, ...` ending exactly at `t_end`.
pub fn sample_times(t_end: f64, dt: f64) -> Vec<f64> {
    let n = (t_end / dt * (1.0 + 1e-12)).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let last = times.last_mut().expect("grid starts at zero");
    if (t_end - *last).abs() <= 1e-12 * t_end {
        *last = t_end;
    } else {
        times.push(t_end);
    }
    times
}
