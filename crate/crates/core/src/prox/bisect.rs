use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Result of a bracketing search on a nondecreasing function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root<T> {
    pub point: T,
    /// Residual evaluated at `point`.
    pub residual: T,
    pub iterations: usize,
    /// Final bracket; `residual(lo) ≤ 0 ≤ residual(hi)` holds throughout.
    pub lo: T,
    pub hi: T,
}

/// Bisection for the root of a nondecreasing `residual` on `[lo, hi]`.
///
/// Halves the bracket until its width drops below `tol`, an exact zero is hit, or
/// the midpoint is no longer representable between the endpoints.
pub fn bisect_monotone<T, F>(mut residual: F, lo: T, hi: T, tol: T, max_iter: usize) -> Result<Root<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidParameter(format!("bisection interval [{lo}, {hi}]")));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("bisection tolerance must be > 0, got {tol}")));
    }
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = residual(lo);
    let f_hi = residual(hi);
    if f_lo.is_nan() || f_hi.is_nan() || f_lo > T::zero() || f_hi < T::zero() {
        return Err(Error::BracketViolation {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: f_lo.as_f64(),
            f_hi: f_hi.as_f64(),
        });
    }
    if f_lo == T::zero() {
        return Ok(Root { point: lo, residual: f_lo, iterations: 0, lo, hi: lo });
    }
    if f_hi == T::zero() {
        return Ok(Root { point: hi, residual: f_hi, iterations: 0, lo: hi, hi });
    }
    let two = T::lit(2.0);
    let mut iterations = 0;
    while hi - lo >= tol {
        if iterations == max_iter {
            return Err(Error::MaxIterations { iterations, context: "bisection" });
        }
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let f_mid = residual(mid);
        if f_mid == T::zero() {
            return Ok(Root { point: mid, residual: f_mid, iterations, lo: mid, hi: mid });
        }
        if f_mid < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let point = lo + (hi - lo) / two;
    Ok(Root { point, residual: residual(point), iterations, lo, hi })
}

/// One Newton step on a piecewise-linear residual whose local slope is known.
///
/// Returns the refined point when it stays inside `[lo, hi]` and does not increase
/// the absolute residual; otherwise returns the input point and residual.
pub fn polish_linear<T, F>(mut residual: F, point: T, value: T, slope: T, lo: T, hi: T) -> (T, T)
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if value == T::zero() || !(slope > T::zero()) {
        return (point, value);
    }
    let cand = point - value / slope;
    if !(cand >= lo && cand <= hi) {
        return (point, value);
    }
    let f_cand = residual(cand);
    if f_cand.abs() <= value.abs() {
        (cand, f_cand)
    } else {
        (point, value)
    }
}
