use serde::Serialize;

use super::SolverError;
use crate::analytics::AnalyticsContext;
use crate::numerics::{bisect, expand_until};
use crate::scalar::{Extended, Scalar};

/// Optimum for a constant setup fee `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantKSolution<T> {
    pub kappa: T,
    pub xi_hat: T,
    pub s_hat: T,
    #[serde(rename = "S_hat")]
    pub big_s_hat: T,
    pub nu_hat: T,
    pub residuals: ConstantResiduals<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantResiduals<T> {
    /// `|I(ν̂/μ − k) − κ|`.
    pub level_integral: T,
    /// `max |g₀(ŝ) − c|, |g₀(Ŝ) − c|` with `c = ν̂/μ − k`.
    pub matched_level: T,
    /// `|L(ξ̂) − κ|`.
    pub area: T,
    /// `|γ(ŝ, Ŝ) − ν̂|`.
    pub average_cost: T,
}

/// Solves `L(ξ̂) = κ` and returns the matched levels and the cost
/// `ν̂ = kμ + μg₀(ŝ)`. A zero fee gives the base-stock policy at `z*`.
pub fn solve_constant<T: Scalar>(ctx: &AnalyticsContext<T>, kappa: T) -> Result<ConstantKSolution<T>, SolverError> {
    if !(kappa >= T::zero() && kappa.is_finite()) {
        return Err(SolverError::InvalidFee(kappa.to_f64_lossy()));
    }
    let mu = ctx.instance().mu();
    let k = ctx.instance().ordering.k;
    let z = ctx.z_star();
    if kappa == T::zero() {
        let nu = k * mu + mu * ctx.g0(z)?;
        let zero = T::zero();
        return Ok(ConstantKSolution {
            kappa,
            xi_hat: zero,
            s_hat: z,
            big_s_hat: z,
            nu_hat: nu,
            residuals: ConstantResiduals { level_integral: zero, matched_level: zero, area: zero, average_cost: zero },
        });
    }
    let root = ctx.root();
    let hi = expand_until(
        |xi: T| Ok::<bool, SolverError>(ctx.big_l(xi)? >= kappa),
        T::zero(),
        T::one(),
        root.factor,
        root.cap,
        T::one(),
    )?;
    let lo = if hi > T::one() { hi / root.factor } else { T::zero() };
    let xi_hat = bisect(|xi| Ok::<T, SolverError>(ctx.big_l(xi)? - kappa), lo, hi, root.max_iter)?;
    let m = ctx.matched_levels(xi_hat)?;
    let level = ctx.g0(m.s_tilde)?;
    let nu_hat = k * mu + mu * level;

    let target = nu_hat / mu - k;
    let residuals = ConstantResiduals {
        level_integral: (ctx.big_i(target)? - kappa).abs(),
        matched_level: (ctx.g0(m.s_tilde)? - target).abs().max((ctx.g0(m.big_s_tilde)? - target).abs()),
        area: (ctx.big_l(xi_hat)? - kappa).abs(),
        average_cost: match ctx.with_setup(constant_setup(kappa)?).gamma(m.s_tilde, m.big_s_tilde)? {
            Extended::Finite(g) => (g - nu_hat).abs(),
            Extended::Infinite => T::infinity(),
        },
    };
    Ok(ConstantKSolution { kappa, xi_hat, s_hat: m.s_tilde, big_s_hat: m.big_s_tilde, nu_hat, residuals })
}

fn constant_setup<T: Scalar>(kappa: T) -> Result<crate::model::SetupCostModel<T>, SolverError> {
    crate::model::SetupCostModel::constant(kappa).map_err(|_| SolverError::InvalidFee(kappa.to_f64_lossy()))
}
