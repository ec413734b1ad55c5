use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<T> {
    pub x: T,
    pub value: T,
}

/// Golden-section search for a minimiser of a unimodal `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `x_tol · (1 + |x|)`. The best
/// point seen (including both end points) is returned, so the result is
/// never worse than the bracket ends even when `f` is not unimodal.
pub fn golden_section_min<T, E, F>(mut f: F, a: T, b: T, x_tol: T, max_iter: u32) -> Result<Minimum<T>, E>
where
    T: Scalar,
    F: FnMut(T) -> Result<T, E>,
{
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut best = Minimum { x: a, value: f(a)? };
    let fb = f(b)?;
    if fb < best.value {
        best = Minimum { x: b, value: fb };
    }
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..max_iter {
        if (b - a) <= x_tol * (T::one() + c.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v < best.value {
            best = Minimum { x, value: v };
        }
    }
    Ok(best)
}
