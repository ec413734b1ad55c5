use super::{AnalyticsContext, AnalyticsError};
use crate::numerics::{adaptive_simpson, bisect, expand_until};
use crate::scalar::Scalar;

impl<T: Scalar> AnalyticsContext<T> {
    /// End points `(s(y), S(y))` of the sublevel set `{g₀ ≤ y}`.
    pub fn level_set(&self, y: T) -> Result<(T, T), AnalyticsError> {
        let z = self.z_star();
        let floor = self.g0(z)?;
        if y < floor || y.is_nan() {
            return Err(AnalyticsError::BelowMinimum { y: y.to_f64_lossy(), min: floor.to_f64_lossy() });
        }
        if y == floor {
            return Ok((z, z));
        }
        let gap = |x: T| Ok::<T, AnalyticsError>(self.g0(x)? - y);
        let exceeds = |x: T| Ok::<bool, AnalyticsError>(self.g0(x)? > y);
        let root = self.root();
        let left = expand_until(exceeds, z, T::one(), root.factor, root.cap, -T::one())?;
        let right = expand_until(exceeds, z, T::one(), root.factor, root.cap, T::one())?;
        let s = bisect(gap, left, z, root.max_iter)?;
        let big_s = bisect(gap, z, right, root.max_iter)?;
        Ok((s, big_s))
    }

    /// `Λ(y)`: Lebesgue measure of `{u : g₀(u) ≤ y}`.
    pub fn lambda_measure(&self, y: T) -> Result<T, AnalyticsError> {
        let (s, big_s) = self.level_set(y)?;
        Ok(big_s - s)
    }

    /// `I(u) = ∫_{g₀(z*)}^u Λ(y)dy`.
    pub fn big_i(&self, u: T) -> Result<T, AnalyticsError> {
        let floor = self.g0_min()?;
        if u < floor || u.is_nan() {
            return Err(AnalyticsError::BelowMinimum { y: u.to_f64_lossy(), min: floor.to_f64_lossy() });
        }
        // Λ grows like √(y − y₀) near the minimum; y = y₀ + t² makes the
        // integrand smooth at the lower end.
        let t_max = (u - floor).sqrt();
        let q = self.quadrature();
        adaptive_simpson(
            |t: T| Ok::<T, AnalyticsError>(T::lit(2.0) * t * self.lambda_measure(floor + t * t)?),
            T::zero(),
            t_max,
            q.tol,
            q.max_depth,
        )
    }

    /// `L(ξ) = ∫_{s̃(ξ)}^{S̃(ξ)} (g₀(s̃(ξ)) − g₀(y))dy`, the area between the
    /// matched cost level and `g₀`.
    pub fn big_l(&self, xi: T) -> Result<T, AnalyticsError> {
        let m = self.matched_levels(xi)?;
        if xi == T::zero() {
            return Ok(T::zero());
        }
        let top = self.g0(m.s_tilde)?;
        let q = self.quadrature();
        let integrand = |y: T| Ok::<T, AnalyticsError>(top - self.g0(y)?);
        let split = T::zero();
        if self.instance().holding.kinked_at_zero() && m.s_tilde < split && split < m.big_s_tilde {
            Ok(adaptive_simpson(integrand, m.s_tilde, split, q.tol * T::lit(0.5), q.max_depth)?
                + adaptive_simpson(integrand, split, m.big_s_tilde, q.tol * T::lit(0.5), q.max_depth)?)
        } else {
            adaptive_simpson(integrand, m.s_tilde, m.big_s_tilde, q.tol, q.max_depth)
        }
    }
}
