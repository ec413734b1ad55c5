//! Steady-state cost functionals of an instance: `g₀`, the optimal base-stock
//! level `z*`, matched levels, average costs `γ` and `θ`, the level-set
//! integrals `Λ`, `I`, `L`, relative value functions and the optimality
//! certificate.
//!
//! Everything hangs off an immutable [`AnalyticsContext`], which owns the
//! instance together with the quadrature and root-finding controls.

mod certificate;
mod levels;
mod value;

use serde::Serialize;
use thiserror::Error;

use crate::model::{HoldingKind, ProblemInstance};
use crate::numerics::{adaptive_simpson, bisect, expand_until, QuadratureError, RootError};
use crate::scalar::{Extended, Scalar};

pub use certificate::{CertificateCheck, CertificateConfig, CertificateReport, CertificateViolation, CheckSummary};
pub use value::ValueFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("g0' is not defined at the kink z = {z} of the holding cost")]
    AtKink { z: f64 },
    #[error("level {y} lies below the minimum {min} of g0")]
    BelowMinimum { y: f64, min: f64 },
    #[error("reorder level {s} exceeds order-up-to level {big_s}")]
    InvertedLevels { s: f64, big_s: f64 },
    #[error("order quantity must be nonnegative, got {0}")]
    NegativeQuantity(f64),
    #[error("invalid numerical configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureScheme {
    /// Closed forms where the holding kind has one, adaptive Simpson otherwise.
    Auto,
    /// Adaptive Simpson everywhere, even when a closed form exists.
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig<T> {
    pub scheme: QuadratureScheme,
    /// Absolute tolerance `ε_q`.
    pub tol: T,
    pub max_depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootConfig<T> {
    /// Geometric growth of bracket probes.
    pub factor: T,
    /// Residual tolerance `ε_r` reported against.
    pub tol: T,
    pub max_iter: u32,
    /// Largest bracket offset tried before giving up.
    pub cap: T,
}

impl<T: Scalar> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self { scheme: QuadratureScheme::Auto, tol: T::default_tolerance(), max_depth: 50 }
    }
}

impl<T: Scalar> Default for RootConfig<T> {
    fn default() -> Self {
        Self { factor: T::lit(2.0), tol: T::default_tolerance(), max_iter: 4000, cap: T::lit(2f64.powi(60)) }
    }
}

/// A matched pair `g₀(s̃) = g₀(S̃)` with `S̃ − s̃ = ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedLevels<T> {
    pub s_tilde: T,
    #[serde(rename = "S_tilde")]
    pub big_s_tilde: T,
    pub xi: T,
}

#[derive(Debug, Clone)]
pub struct AnalyticsContext<T> {
    instance: ProblemInstance<T>,
    quadrature: QuadratureConfig<T>,
    root: RootConfig<T>,
    z_star: T,
}

impl<T: Scalar> AnalyticsContext<T> {
    pub fn new(instance: ProblemInstance<T>) -> Result<Self, AnalyticsError> {
        Self::with_config(instance, QuadratureConfig::default(), RootConfig::default())
    }

    pub fn with_config(
        instance: ProblemInstance<T>,
        quadrature: QuadratureConfig<T>,
        root: RootConfig<T>,
    ) -> Result<Self, AnalyticsError> {
        let ceiling = T::lit(1e-4);
        for (name, v) in [("quadrature tolerance", quadrature.tol), ("root tolerance", root.tol)] {
            if !(v > T::zero() && v <= ceiling) {
                return Err(AnalyticsError::Config(format!("{name} must lie in (0, 1e-4], got {v}")));
            }
        }
        if !(root.factor > T::one()) || !(root.cap > T::one()) {
            return Err(AnalyticsError::Config("bracket factor and cap must exceed 1".into()));
        }
        let mut ctx = Self { instance, quadrature, root, z_star: T::zero() };
        ctx.z_star = ctx.find_z_star()?;
        Ok(ctx)
    }

    pub fn instance(&self) -> &ProblemInstance<T> {
        &self.instance
    }

    pub fn quadrature(&self) -> QuadratureConfig<T> {
        self.quadrature
    }

    pub fn root(&self) -> RootConfig<T> {
        self.root
    }

    /// Same numerical controls, different setup cost.
    pub fn with_setup(&self, setup: crate::model::SetupCostModel<T>) -> Self {
        Self {
            instance: self.instance.with_setup(setup),
            quadrature: self.quadrature,
            root: self.root,
            z_star: self.z_star,
        }
    }

    fn mu(&self) -> T {
        self.instance.mu()
    }

    fn lambda(&self) -> T {
        self.instance.lambda()
    }

    fn closed_form(&self) -> bool {
        self.quadrature.scheme == QuadratureScheme::Auto
            && !matches!(self.instance.holding.kind(), HoldingKind::ConvexPoly { .. })
    }

    /// `g₀(z) = (λ/μ)∫₀^∞ h(y+z)e^{−λy}dy`.
    pub fn g0(&self, z: T) -> Result<T, AnalyticsError> {
        if self.closed_form() {
            if let Some(v) = self.instance.holding.exp_shift_mean(z, self.lambda()) {
                return Ok(v / self.mu());
            }
        }
        let h = &self.instance.holding;
        self.exp_weighted(z, |x| h.eval(x))
    }

    /// `g₀'(z)`. Rejected exactly at a kink of `h`.
    pub fn g0_prime(&self, z: T) -> Result<T, AnalyticsError> {
        if z == T::zero() && self.instance.holding.kinked_at_zero() {
            return Err(AnalyticsError::AtKink { z: 0.0 });
        }
        self.g0_prime_unchecked(z)
    }

    /// `g₀'` is continuous even where `h` has a kink, so internal callers may
    /// evaluate it anywhere.
    pub(crate) fn g0_prime_unchecked(&self, z: T) -> Result<T, AnalyticsError> {
        let lambda = self.lambda();
        let mu = self.mu();
        if self.closed_form() {
            match *self.instance.holding.kind() {
                HoldingKind::PiecewiseLinear { beta1, beta2 } => {
                    return Ok(if z >= T::zero() { beta1 / mu } else { ((beta1 + beta2) * (lambda * z).exp() - beta2) / mu });
                }
                HoldingKind::Quadratic { beta } => {
                    return Ok(T::lit(2.0) * beta * (z + lambda.recip()) / mu);
                }
                HoldingKind::ConvexPoly { .. } => {}
            }
        }
        // differentiate under the integral sign
        let h = &self.instance.holding;
        self.exp_weighted(z, |x| h.derivative(x))
    }

    /// `(λ/μ)∫₀^∞ f(y+z)e^{−λy}dy` for `f` bounded by the growth witness of `h`
    /// (or its derivative), truncated where the witness tail drops below `ε_q`.
    fn exp_weighted(&self, z: T, f: impl Fn(T) -> T) -> Result<T, AnalyticsError> {
        let lambda = self.lambda();
        let mu = self.mu();
        let bound = self.instance.holding.bound();
        let eps = self.quadrature.tol;
        let tail = |u: T| {
            (-lambda * u).exp()
                * (bound.b0 + bound.b1 * T::lit(bound.degree as f64 + 1.0) * (z.abs() + u + T::one()).powi(bound.degree as i32))
        };
        let mut u_max = lambda.recip().max(T::one());
        while tail(u_max) > eps {
            u_max *= T::lit(2.0);
            if !u_max.is_finite() {
                return Err(QuadratureError::NonFinite { x: z.to_f64_lossy() }.into());
            }
        }
        let integrand = |y: T| Ok::<T, AnalyticsError>(f(y + z) * (-lambda * y).exp());
        let tol = eps * mu / lambda;
        let kink = -z;
        let total = if kink > T::zero() && kink < u_max {
            adaptive_simpson(integrand, T::zero(), kink, tol * T::lit(0.5), self.quadrature.max_depth)?
                + adaptive_simpson(integrand, kink, u_max, tol * T::lit(0.5), self.quadrature.max_depth)?
        } else {
            adaptive_simpson(integrand, T::zero(), u_max, tol, self.quadrature.max_depth)?
        };
        Ok(lambda / mu * total)
    }

    fn find_z_star(&self) -> Result<T, AnalyticsError> {
        // g0'(0) = λg0(0) > 0, so walk left until the derivative turns negative
        let lo = expand_until(
            |x| Ok::<bool, AnalyticsError>(self.g0_prime_unchecked(x)? < T::zero()),
            T::zero(),
            T::one(),
            self.root.factor,
            self.root.cap,
            -T::one(),
        )?;
        bisect(|x| self.g0_prime_unchecked(x), lo, T::zero(), self.root.max_iter)
    }

    /// Optimal base-stock level: the unique (negative) minimiser of `g₀`.
    pub fn z_star(&self) -> T {
        self.z_star
    }

    /// `g₀(z*)`, the minimum of `g₀`.
    pub fn g0_min(&self) -> Result<T, AnalyticsError> {
        self.g0(self.z_star)
    }

    /// The pair `s̃ < z* < S̃ = s̃ + ξ` with `g₀(s̃) = g₀(S̃)`.
    pub fn matched_levels(&self, xi: T) -> Result<MatchedLevels<T>, AnalyticsError> {
        if xi < T::zero() || xi.is_nan() {
            return Err(AnalyticsError::NegativeQuantity(xi.to_f64_lossy()));
        }
        let z = self.z_star;
        if xi == T::zero() {
            return Ok(MatchedLevels { s_tilde: z, big_s_tilde: z, xi });
        }
        // the gap g0(s+ξ) − g0(s) increases in s and changes sign on [z*−ξ, z*]
        let s = bisect(|s| Ok::<T, AnalyticsError>(self.g0(s + xi)? - self.g0(s)?), z - xi, z, self.root.max_iter)?;
        Ok(MatchedLevels { s_tilde: s, big_s_tilde: s + xi, xi })
    }

    /// `∫_a^b g₀(y ∨ floor)dy`, with the floor optional.
    pub(crate) fn integral_g0(&self, a: T, b: T, floor: Option<T>) -> Result<T, AnalyticsError> {
        if a == b {
            return Ok(T::zero());
        }
        if b < a {
            return self.integral_g0(b, a, floor).map(|v| -v);
        }
        let mut total = T::zero();
        let mut lo = a;
        if let Some(f) = floor {
            if f > a {
                let flat = f.min(b);
                total += (flat - a) * self.g0(f)?;
                lo = flat;
            }
        }
        if lo >= b {
            return Ok(total);
        }
        let tol = self.quadrature.tol;
        let depth = self.quadrature.max_depth;
        let integrand = |y: T| self.g0(y);
        // g0'' jumps where h has a kink
        let split = T::zero();
        if self.instance.holding.kinked_at_zero() && lo < split && split < b {
            total += adaptive_simpson(integrand, lo, split, tol * T::lit(0.5), depth)?;
            total += adaptive_simpson(integrand, split, b, tol * T::lit(0.5), depth)?;
        } else {
            total += adaptive_simpson(integrand, lo, b, tol, depth)?;
        }
        Ok(total)
    }

    /// Long-run average cost of the `(s, S)` policy; `s = S` is the base-stock
    /// policy at `s`, whose cost is infinite when `ℓ = ∞`.
    pub fn gamma(&self, s: T, big_s: T) -> Result<Extended<T>, AnalyticsError> {
        if s > big_s || s.is_nan() || big_s.is_nan() {
            return Err(AnalyticsError::InvertedLevels { s: s.to_f64_lossy(), big_s: big_s.to_f64_lossy() });
        }
        let mu = self.mu();
        let k = self.instance.ordering.k;
        if s == big_s {
            let base = mu * self.g0(s)?;
            return Ok(self.instance.setup().ell().scale_add(mu, k * mu + base));
        }
        let xi = big_s - s;
        let setup = self.instance.setup().eval_nonneg(xi);
        let area = self.integral_g0(s, big_s, None)?;
        Ok(Extended::Finite(k * mu + setup * mu / xi + mu / xi * area))
    }

    /// Least average cost among policies whose every order has size `ξ`.
    pub fn theta(&self, xi: T) -> Result<Extended<T>, AnalyticsError> {
        let m = self.matched_levels(xi)?;
        self.gamma(m.s_tilde, m.big_s_tilde)
    }

    /// `θ` together with the levels attaining it.
    pub fn theta_with_levels(&self, xi: T) -> Result<(Extended<T>, MatchedLevels<T>), AnalyticsError> {
        let m = self.matched_levels(xi)?;
        Ok((self.gamma(m.s_tilde, m.big_s_tilde)?, m))
    }
}

#[cfg(test)]
mod tests;
