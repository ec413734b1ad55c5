use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("bracket expansion from {anchor} exceeded span {cap:e} without meeting the condition")]
    ExpansionFailed { anchor: f64, cap: f64 },
    #[error("non-finite function value at x = {x}")]
    NonFinite { x: f64 },
}

/// Bisection for a root of `f` on `[lo, hi]`.
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them be zero).
/// Iterates until the bracket cannot be split any further in `T`, an exact
/// zero is hit, or `max_iter` halvings have been made; returns the midpoint
/// of the final bracket.
pub fn bisect<T, E, F>(mut f: F, lo: T, hi: T, max_iter: u32) -> Result<T, E>
where
    T: Scalar,
    E: From<RootError>,
    F: FnMut(T) -> Result<T, E>,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    for (x, v) in [(lo, f_lo), (hi, f_hi)] {
        if !v.is_finite() {
            return Err(RootError::NonFinite { x: x.to_f64_lossy() }.into());
        }
    }
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::NoSignChange {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
            f_lo: f_lo.to_f64_lossy(),
            f_hi: f_hi.to_f64_lossy(),
        }
        .into());
    }
    let lo_negative = f_lo < T::zero();
    for _ in 0..max_iter {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid)?;
        if !v.is_finite() {
            return Err(RootError::NonFinite { x: mid.to_f64_lossy() }.into());
        }
        if v == T::zero() {
            return Ok(mid);
        }
        if (v < T::zero()) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) * T::lit(0.5))
}

/// Walks away from `anchor` in geometrically growing steps until `done`
/// accepts the point, returning that point.
///
/// The k-th probe is `anchor + direction · step · factor^k`; the search
/// fails once the offset exceeds `cap`.
pub fn expand_until<T, E, F>(
    mut done: F,
    anchor: T,
    step: T,
    factor: T,
    cap: T,
    direction: T,
) -> Result<T, E>
where
    T: Scalar,
    E: From<RootError>,
    F: FnMut(T) -> Result<bool, E>,
{
    let mut offset = step;
    while offset <= cap {
        let x = anchor + direction * offset;
        if done(x)? {
            return Ok(x);
        }
        offset *= factor;
    }
    Err(RootError::ExpansionFailed {
        anchor: anchor.to_f64_lossy(),
        cap: cap.to_f64_lossy(),
    }
    .into())
}
