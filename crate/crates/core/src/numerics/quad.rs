use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadratureError {
    #[error("adaptive Simpson did not reach tolerance {tol:e} on [{a}, {b}] within depth {depth}")]
    NotConverged { a: f64, b: f64, tol: f64, depth: u32 },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is first cut into eight panels so that narrow features are
/// not skipped by the initial five-point estimate. Each panel is refined
/// recursively with Richardson extrapolation. Reversed limits give the
/// negated integral.
pub fn adaptive_simpson<T, E, F>(mut f: F, a: T, b: T, tol: T, max_depth: u32) -> Result<T, E>
where
    T: Scalar,
    E: From<QuadratureError>,
    F: FnMut(T) -> Result<T, E>,
{
    if a == b {
        return Ok(T::zero());
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol, max_depth).map(|v| -v);
    }
    const PANELS: usize = 8;
    let width = (b - a) / T::lit(PANELS as f64);
    let panel_tol = tol / T::lit(PANELS as f64);
    let mut total = T::zero();
    let mut left = a;
    let mut f_left = eval(&mut f, a)?;
    for i in 0..PANELS {
        let right = if i + 1 == PANELS { b } else { a + width * T::lit((i + 1) as f64) };
        let mid = (left + right) * T::lit(0.5);
        let f_mid = eval(&mut f, mid)?;
        let f_right = eval(&mut f, right)?;
        let whole = simpson(left, right, f_left, f_mid, f_right);
        total += refine(&mut f, left, right, f_left, f_mid, f_right, whole, panel_tol, max_depth)?;
        left = right;
        f_left = f_right;
    }
    Ok(total)
}

#[inline]
fn simpson<T: Scalar>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

fn eval<T, E, F>(f: &mut F, x: T) -> Result<T, E>
where
    T: Scalar,
    E: From<QuadratureError>,
    F: FnMut(T) -> Result<T, E>,
{
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadratureError::NonFinite { x: x.to_f64_lossy() }.into())
    }
}

#[allow(clippy::too_many_arguments)]
fn refine<T, E, F>(
    f: &mut F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> Result<T, E>
where
    T: Scalar,
    E: From<QuadratureError>,
    F: FnMut(T) -> Result<T, E>,
{
    let m = (a + b) * T::lit(0.5);
    let lm = (a + m) * T::lit(0.5);
    let rm = (m + b) * T::lit(0.5);
    let flm = eval(f, lm)?;
    let frm = eval(f, rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // Below this floor the estimate is dominated by rounding, not truncation.
    let floor = T::epsilon() * T::lit(64.0) * (left.abs() + right.abs());
    if delta.abs() <= T::lit(15.0) * tol.max(floor) || m <= a || m >= b {
        return Ok(left + right + delta / T::lit(15.0));
    }
    if depth == 0 {
        return Err(QuadratureError::NotConverged {
            a: a.to_f64_lossy(),
            b: b.to_f64_lossy(),
            tol: tol.to_f64_lossy(),
            depth,
        }
        .into());
    }
    let half = tol * T::lit(0.5);
    Ok(refine(f, a, m, fa, flm, fm, left, half, depth - 1)?
        + refine(f, m, b, fm, frm, fb, right, half, depth - 1)?)
}
