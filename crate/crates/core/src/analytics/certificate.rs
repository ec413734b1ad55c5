//! Lower-bound certificate for a candidate optimum `(s*, S*, ν*)`.
//!
//! The candidate passes when the floored value function `V*` satisfies, on a
//! grid around the policy:
//!
//! * (a) `ΓV*(z) + h(z) ≥ ν* − tol` wherever `V*''` exists;
//! * (b) `V*(z₁) − V*(z₂) ≥ −K(z₁ − z₂) − k(z₁ − z₂)` for `z₁ > z₂`, on all grid
//!   pairs and on seeded random pairs;
//! * (c) `|V*'|` bounded by a constant for `z < 0` and by a polynomial for `z ≥ 0`;
//! * (d) `γ(s*, S*) = ν*`, i.e. the candidate policy really attains `ν*`.
//!
//! Because `g₀` solves `(σ²/2)g₀' − μg₀ + h = 0`, check (a) is an identity
//! above the floor for every `ν`; a wrong `ν*` shows up in (b) and (d).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{AnalyticsContext, AnalyticsError, ValueFunction};
use crate::numerics::expand_until;
use crate::scalar::{Extended, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateConfig<T> {
    pub grid_points: usize,
    /// Grid spans `[s* − f·w, S* + f·w]` with `w = S* − s* + 1`.
    pub span_factor: T,
    pub tol: T,
    pub random_pairs: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for CertificateConfig<T> {
    fn default() -> Self {
        Self {
            grid_points: 4096,
            span_factor: T::lit(10.0),
            tol: T::lit(1e-7).max(T::epsilon() * T::lit(1000.0)),
            random_pairs: 10_000,
            seed: 0x5eed_cafe,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateCheck {
    Generator,
    OrderCost,
    Growth,
    Attainment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateViolation<T> {
    pub check: CertificateCheck,
    pub z: T,
    /// Lower point of the pair for the order-cost check.
    pub z2: Option<T>,
    /// `lhs − rhs` of the violated inequality (negative).
    pub slack: T,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary<T> {
    pub check: CertificateCheck,
    pub evaluated: usize,
    pub failures: usize,
    /// Smallest `lhs − rhs` seen (plus tolerance); negative means failure.
    pub worst_slack: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport<T> {
    pub passed: bool,
    pub s_star: T,
    #[serde(rename = "S_star")]
    pub big_s_star: T,
    pub nu_star: T,
    /// Floor level `s̲` below which `V*` is linear.
    pub floor: T,
    pub xi_bar: T,
    pub grid_lo: T,
    pub grid_hi: T,
    pub config: CertificateConfig<T>,
    pub checks: Vec<CheckSummary<T>>,
    /// The first few violations, in check order.
    pub violations: Vec<CertificateViolation<T>>,
}

impl<T: Scalar> CertificateReport<T> {
    pub fn summary(&self, check: CertificateCheck) -> Option<&CheckSummary<T>> {
        self.checks.iter().find(|c| c.check == check)
    }

    pub fn failed(&self, check: CertificateCheck) -> bool {
        self.summary(check).is_some_and(|c| c.failures > 0)
    }
}

const KEEP_VIOLATIONS: usize = 16;

struct Tally<T> {
    summary: CheckSummary<T>,
}

impl<T: Scalar> Tally<T> {
    fn new(check: CertificateCheck) -> Self {
        Self { summary: CheckSummary { check, evaluated: 0, failures: 0, worst_slack: T::infinity() } }
    }

    fn record(
        &mut self,
        slack: T,
        out: &mut Vec<CertificateViolation<T>>,
        site: impl FnOnce() -> (T, Option<T>, String),
    ) {
        self.summary.evaluated += 1;
        if slack < self.summary.worst_slack || slack.is_nan() {
            self.summary.worst_slack = slack;
        }
        if !(slack >= T::zero()) {
            self.summary.failures += 1;
            if out.len() < KEEP_VIOLATIONS {
                let (z, z2, message) = site();
                out.push(CertificateViolation { check: self.summary.check, z, z2, slack, message });
            }
        }
    }
}

impl<T: Scalar> AnalyticsContext<T> {
    /// Floor level `s̲ = s̃(ξ̄)`, where `ξ̄` is the first doubling step with
    /// `θ(ξ̄) > K̄μ/ξ̄ + ν`. Returns `(s̲, ξ̄)`.
    pub fn certificate_floor(&self, nu: T, start: T) -> Result<(T, T), AnalyticsError> {
        let mu = self.instance().mu();
        let k_bar = self.instance().setup().sup();
        let xi_bar = expand_until(
            |xi: T| {
                Ok::<bool, AnalyticsError>(match self.theta(xi)? {
                    Extended::Finite(t) => t > k_bar * mu / xi + nu,
                    Extended::Infinite => false,
                })
            },
            T::zero(),
            start.max(T::lit(1e-3)),
            T::lit(2.0),
            self.root().cap,
            T::one(),
        )?;
        Ok((self.matched_levels(xi_bar)?.s_tilde, xi_bar))
    }

    pub fn vstar_certificate(
        &self,
        s_star: T,
        big_s_star: T,
        nu_star: T,
        config: &CertificateConfig<T>,
    ) -> Result<CertificateReport<T>, AnalyticsError> {
        if s_star > big_s_star {
            return Err(AnalyticsError::InvertedLevels { s: s_star.to_f64_lossy(), big_s: big_s_star.to_f64_lossy() });
        }
        if config.grid_points < 2 {
            return Err(AnalyticsError::Config("certificate grid needs at least two points".into()));
        }
        let inst = self.instance();
        let mu = inst.mu();
        let k = inst.ordering.k;
        let setup = inst.setup();
        let tol = config.tol;

        let width = big_s_star - s_star + T::one();
        let (floor, xi_bar) = self.certificate_floor(nu_star, width)?;
        let mut lo = s_star - config.span_factor * width;
        let hi = big_s_star + config.span_factor * width;
        if floor <= lo {
            lo = floor - width;
        }
        let n = config.grid_points;
        let step = (hi - lo) / T::lit((n - 1) as f64);
        let nodes: Vec<T> = (0..n).map(|i| if i + 1 == n { hi } else { lo + step * T::lit(i as f64) }).collect();

        let v = ValueFunction::floored(self, floor, nu_star);
        let mut values = Vec::with_capacity(n);
        values.push(v.value(lo)?);
        for w in nodes.windows(2) {
            let prev = *values.last().expect("nonempty");
            values.push(prev + v.increment(w[0], w[1])?);
        }

        let mut violations = Vec::new();

        // (a) generator inequality
        let mut gen = Tally::new(CertificateCheck::Generator);
        for &z in &nodes {
            if let Some(r) = v.generator_residual(z)? {
                gen.record(r + tol, &mut violations, || {
                    (z, None, format!("ΓV*(z) + h(z) = {} is below ν* = {nu_star}", r + nu_star))
                });
            }
        }

        // (b) order-cost inequality on grid pairs, then on random pairs
        let mut order = Tally::new(CertificateCheck::OrderCost);
        let pair_slack = |z1: T, v1: T, z2: T, v2: T| {
            let d = z1 - z2;
            let lhs = v1 - v2;
            let rhs = -setup.eval_nonneg(d) - k * d;
            lhs - rhs + tol * (T::one() + v1.abs().max(v2.abs()))
        };
        for i in 1..n {
            for j in 0..i {
                let slack = pair_slack(nodes[i], values[i], nodes[j], values[j]);
                order.record(slack, &mut violations, || {
                    (nodes[i], Some(nodes[j]), "V*(z1) − V*(z2) < −K(z1 − z2) − k(z1 − z2)".to_string())
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let value_at = |z: T| -> Result<T, AnalyticsError> {
            let idx = ((z - lo) / step).floor().to_usize().unwrap_or(0).min(n - 1);
            Ok(values[idx] + v.increment(nodes[idx], z)?)
        };
        for _ in 0..config.random_pairs {
            let a = lo + (hi - lo) * T::lit(rng.random::<f64>());
            let b = lo + (hi - lo) * T::lit(rng.random::<f64>());
            if a == b {
                continue;
            }
            let (z1, z2) = if a > b { (a, b) } else { (b, a) };
            let slack = pair_slack(z1, value_at(z1)?, z2, value_at(z2)?);
            order.record(slack, &mut violations, || {
                (z1, Some(z2), "random pair: V*(z1) − V*(z2) < −K(z1 − z2) − k(z1 − z2)".to_string())
            });
        }

        // (c) growth of V*'
        let mut growth = Tally::new(CertificateCheck::Growth);
        let bound = inst.holding.bound();
        let lambda = inst.lambda();
        let a = bound.degree as i32;
        let two_pow = T::lit(2f64.powi(a - 1));
        let factorial: T = (1..=bound.degree).map(|j| T::lit(j as f64)).fold(T::one(), |p, j| p * j);
        let a0_pos = nu_star / mu + (bound.b0 + bound.b1 * two_pow * factorial / lambda.powi(a)) / mu;
        let a1 = bound.b1 * two_pow / mu;
        let a0_neg = nu_star / mu + self.g0(floor)?.max(self.g0(T::zero())?);
        for &z in &nodes {
            let d = v.derivative(z)?.abs();
            let cap = if z < T::zero() { a0_neg } else { a0_pos + a1 * z.powi(a) };
            growth.record(cap - d + tol * (T::one() + cap), &mut violations, || {
                (z, None, format!("|V*'(z)| = {d} exceeds growth bound {cap}"))
            });
        }

        // (d) the candidate attains its claimed cost
        let mut attain = Tally::new(CertificateCheck::Attainment);
        let gamma = self.gamma(s_star, big_s_star)?;
        let slack = match gamma {
            Extended::Finite(g) => tol * (T::one() + nu_star.abs()) - (g - nu_star).abs(),
            Extended::Infinite => -T::infinity(),
        };
        attain.record(slack, &mut violations, || {
            (s_star, Some(big_s_star), format!("γ(s*, S*) = {} differs from ν* = {nu_star}", gamma.to_float()))
        });

        let checks = vec![gen.summary, order.summary, growth.summary, attain.summary];
        let passed = checks.iter().all(|c| c.failures == 0);
        Ok(CertificateReport {
            passed,
            s_star,
            big_s_star,
            nu_star,
            floor,
            xi_bar,
            grid_lo: lo,
            grid_hi: hi,
            config: *config,
            checks,
            violations,
        })
    }
}
