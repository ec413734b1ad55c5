//! Problem instances: Brownian demand, holding/shortage cost and
//! quantity-dependent ordering cost.
//!
//! Everything here is immutable once validated. Validation is
//! all-or-nothing and reports every violated condition at once, each tagged
//! with the model condition it breaks (`S1`–`S4` for the setup cost,
//! `H1`–`H5` for the holding cost).

mod document;
mod holding;
mod setup;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

pub use document::{
    BoundDocument, DemandDocument, HoldingDocument, HoldingTag, OrderingDocument, ProblemDocument,
    SetupDocument, SetupTag,
};
pub use holding::{HoldingCostModel, HoldingKind, PolyBound, SampleGrid};
pub use setup::{OrderingCostModel, SetupCostModel, SetupKind};

/// Model condition a validation failure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Condition {
    S1,
    S2,
    S3,
    S4,
    H1,
    H2,
    H3,
    H4,
    H5,
    /// Demand parameters (`mu > 0`, `sigma2 > 0`).
    Demand,
    /// Proportional ordering rate.
    Ordering,
    /// Shape of the description: missing fields, list lengths, ordering of breakpoints.
    Structure,
    /// Input could not be parsed at all.
    Schema,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::S1 => "S1",
            Condition::S2 => "S2",
            Condition::S3 => "S3",
            Condition::S4 => "S4",
            Condition::H1 => "H1",
            Condition::H2 => "H2",
            Condition::H3 => "H3",
            Condition::H4 => "H4",
            Condition::H5 => "H5",
            Condition::Demand => "demand",
            Condition::Ordering => "ordering",
            Condition::Structure => "structure",
            Condition::Schema => "schema",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub value: Option<f64>,
    pub message: String,
}

impl Violation {
    pub(crate) fn new(condition: Condition, value: Option<f64>, message: impl Into<String>) -> Self {
        Self { condition, value, message: message.into() }
    }
}

/// Every violated condition found while validating one description.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
    /// Grid used for sampled checks, when any were run.
    pub grid: Option<SampleGrid>,
}

impl ValidationError {
    pub fn single(condition: Condition, value: Option<f64>, message: impl Into<String>) -> Self {
        Self { violations: vec![Violation::new(condition, value, message)], grid: None }
    }

    pub fn has(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated condition(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "; [{}] {}", v.condition, v.message)?;
            if let Some(x) = v.value {
                write!(f, " (value {x})")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("order quantity must be nonnegative, got {0}")]
    NegativeQuantity(f64),
}

/// Demand `D(t) = μt − σB(t)`; `λ = 2μ/σ²` is cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrownianDemand<T> {
    mu: T,
    sigma2: T,
    lambda: T,
}

impl<T: Scalar> BrownianDemand<T> {
    pub fn new(mu: T, sigma2: T) -> Result<Self, ValidationError> {
        let mut v = Vec::new();
        if !(mu > T::zero() && mu.is_finite()) {
            v.push(Violation::new(Condition::Demand, Some(mu.to_f64_lossy()), "drift mu must be positive and finite"));
        }
        if !(sigma2 > T::zero() && sigma2.is_finite()) {
            v.push(Violation::new(
                Condition::Demand,
                Some(sigma2.to_f64_lossy()),
                "variance rate sigma2 must be positive and finite",
            ));
        }
        if !v.is_empty() {
            return Err(ValidationError { violations: v, grid: None });
        }
        Ok(Self { mu, sigma2, lambda: T::lit(2.0) * mu / sigma2 })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    pub fn sigma(&self) -> T {
        self.sigma2.sqrt()
    }

    /// `2μ/σ²`.
    pub fn lambda(&self) -> T {
        self.lambda
    }
}

/// A validated problem: the full input to the solver and the simulator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemInstance<T> {
    pub demand: BrownianDemand<T>,
    pub holding: HoldingCostModel<T>,
    pub ordering: OrderingCostModel<T>,
    /// Initial inventory level `Z(0−)`; only the simulator uses it.
    pub x0: T,
}

impl<T: Scalar> ProblemInstance<T> {
    /// Assembles an instance from already-validated parts.
    pub fn new(
        demand: BrownianDemand<T>,
        holding: HoldingCostModel<T>,
        ordering: OrderingCostModel<T>,
        x0: T,
    ) -> Self {
        Self { demand, holding, ordering, x0 }
    }

    pub fn mu(&self) -> T {
        self.demand.mu()
    }

    pub fn lambda(&self) -> T {
        self.demand.lambda()
    }

    pub fn setup(&self) -> &SetupCostModel<T> {
        &self.ordering.setup
    }

    /// Replaces the setup cost, keeping everything else.
    pub fn with_setup(&self, setup: SetupCostModel<T>) -> Self {
        let mut out = self.clone();
        out.ordering.setup = setup;
        out
    }
}

/// Validates a parsed description into an instance over `T`.
pub fn validate<T: Scalar>(document: &ProblemDocument) -> Result<ProblemInstance<T>, ValidationError> {
    document.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_is_two_mu_over_sigma2() {
        let d = BrownianDemand::new(1.5_f64, 0.6).unwrap();
        assert_eq!(d.lambda(), 2.0 * 1.5 / 0.6);
    }

    #[test]
    fn demand_rejects_nonpositive_parameters_together() {
        let e = BrownianDemand::new(0.0_f64, -1.0).unwrap_err();
        assert_eq!(e.violations.len(), 2);
        assert!(e.violations.iter().all(|v| v.condition == Condition::Demand));
    }
}
