use super::{AnalyticsContext, AnalyticsError};
use crate::scalar::Scalar;

/// Relative value function `V(z) = −(z − s)ν/μ + ∫_s^z g₀(y ∨ s̲)dy`.
///
/// Without a floor this is the relative value of an `(s, S)` policy with
/// average cost `ν`, anchored so that `V(s) = 0`. With a floor `s̲` the
/// integrand is frozen at `g₀(s̲)` below `s̲`, and the anchor is `s̲` itself.
#[derive(Debug, Clone, Copy)]
pub struct ValueFunction<'a, T> {
    ctx: &'a AnalyticsContext<T>,
    pub nu: T,
    pub anchor: T,
    pub floor: Option<T>,
}

impl<'a, T: Scalar> ValueFunction<'a, T> {
    pub fn new(ctx: &'a AnalyticsContext<T>, anchor: T, nu: T) -> Self {
        Self { ctx, nu, anchor, floor: None }
    }

    /// The floored variant `V*`, anchored at the floor.
    pub fn floored(ctx: &'a AnalyticsContext<T>, floor: T, nu: T) -> Self {
        Self { ctx, nu, anchor: floor, floor: Some(floor) }
    }

    pub fn value(&self, z: T) -> Result<T, AnalyticsError> {
        let mu = self.ctx.instance().mu();
        Ok(-(z - self.anchor) * self.nu / mu + self.ctx.integral_g0(self.anchor, z, self.floor)?)
    }

    /// `V(b) − V(a)`, integrating only over `[a, b]`.
    pub fn increment(&self, a: T, b: T) -> Result<T, AnalyticsError> {
        let mu = self.ctx.instance().mu();
        Ok(-(b - a) * self.nu / mu + self.ctx.integral_g0(a, b, self.floor)?)
    }

    pub fn derivative(&self, z: T) -> Result<T, AnalyticsError> {
        let mu = self.ctx.instance().mu();
        let at = self.floor.map_or(z, |f| z.max(f));
        Ok(-self.nu / mu + self.ctx.g0(at)?)
    }

    /// `V''(z)`, or `None` at the floor where it does not exist.
    pub fn second_derivative(&self, z: T) -> Result<Option<T>, AnalyticsError> {
        match self.floor {
            Some(f) if z == f => Ok(None),
            Some(f) if z < f => Ok(Some(T::zero())),
            _ => self.ctx.g0_prime_unchecked(z).map(Some),
        }
    }

    /// `ΓV(z) + h(z) − ν` with `Γ = (σ²/2)d²/dz² − μ d/dz`; `None` where `V''`
    /// does not exist.
    pub fn generator_residual(&self, z: T) -> Result<Option<T>, AnalyticsError> {
        let Some(v2) = self.second_derivative(z)? else {
            return Ok(None);
        };
        let inst = self.ctx.instance();
        let gen = T::lit(0.5) * inst.demand.sigma2() * v2 - inst.mu() * self.derivative(z)?;
        Ok(Some(gen + inst.holding.eval(z) - self.nu))
    }
}

impl<T: Scalar> AnalyticsContext<T> {
    /// `V(z)` anchored at `s` for average cost `ν`.
    pub fn relative_value(&self, z: T, s: T, nu: T) -> Result<T, AnalyticsError> {
        ValueFunction::new(self, s, nu).value(z)
    }
}
