//! JSON problem description.
//!
//! ```json
//! {"demand":{"mu":1.0,"sigma2":2.0},
//!  "holding":{"kind":"quadratic","beta":1.0},
//!  "ordering":{"k":0.0,"setup":{"kind":"step","breakpoints":[4.0],"values":[6.0,48.0]}},
//!  "x0": 0.0}
//! ```
//!
//! Unknown fields are rejected. Fields not used by the chosen `kind` are
//! reported as structural violations rather than silently ignored.

use serde::{Deserialize, Serialize};

use super::{
    BrownianDemand, Condition, HoldingCostModel, HoldingKind, OrderingCostModel, PolyBound, ProblemInstance,
    SetupCostModel, ValidationError, Violation,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub demand: DemandDocument,
    pub holding: HoldingDocument,
    pub ordering: OrderingDocument,
    #[serde(default)]
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandDocument {
    pub mu: f64,
    pub sigma2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoldingTag {
    PiecewiseLinear,
    Quadratic,
    ConvexPoly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoldingDocument {
    pub kind: HoldingTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundDocument>,
}

/// Growth witness `h(z) ≤ b0 + b1·|z|^a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundDocument {
    pub a: u32,
    pub b0: f64,
    pub b1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingDocument {
    #[serde(default)]
    pub k: f64,
    pub setup: SetupDocument,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetupTag {
    Constant,
    Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupDocument {
    pub kind: SetupTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl ProblemDocument {
    /// Parses JSON; syntax and schema errors come back as a `schema`
    /// violation carrying the line and column.
    pub fn from_json_str(text: &str) -> Result<Self, ValidationError> {
        serde_json::from_str(text).map_err(|e| {
            ValidationError::single(
                Condition::Schema,
                None,
                format!("invalid problem document at line {} column {}: {e}", e.line(), e.column()),
            )
        })
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self, ValidationError> {
        serde_json::from_value(value)
            .map_err(|e| ValidationError::single(Condition::Schema, None, format!("invalid problem document: {e}")))
    }

    /// Validates every component, collecting all violations before failing.
    pub fn validate<T: Scalar>(&self) -> Result<ProblemInstance<T>, ValidationError> {
        let mut violations = Vec::new();
        let mut grid = None;
        let mut absorb = |e: ValidationError, violations: &mut Vec<Violation>| {
            if e.grid.is_some() {
                grid = e.grid;
            }
            violations.extend(e.violations);
        };

        let demand = BrownianDemand::new(T::lit(self.demand.mu), T::lit(self.demand.sigma2))
            .map_err(|e| absorb(e, &mut violations))
            .ok();
        let holding = self
            .holding
            .validate::<T>()
            .map_err(|e| absorb(e, &mut violations))
            .ok();
        let setup = self
            .ordering
            .setup
            .validate::<T>()
            .map_err(|e| absorb(e, &mut violations))
            .ok();
        let k = T::lit(self.ordering.k);
        if !(k >= T::zero() && k.is_finite()) {
            violations.push(Violation::new(
                Condition::Ordering,
                Some(self.ordering.k),
                "proportional ordering rate k must be nonnegative and finite",
            ));
        }
        if !self.x0.is_finite() {
            violations.push(Violation::new(Condition::Structure, Some(self.x0), "x0 must be finite"));
        }
        match (demand, holding, setup) {
            (Some(d), Some(h), Some(s)) if violations.is_empty() => {
                let ordering = OrderingCostModel::new(k, s)?;
                Ok(ProblemInstance::new(d, h, ordering, T::lit(self.x0)))
            }
            _ => Err(ValidationError { violations, grid }),
        }
    }
}

impl HoldingDocument {
    fn validate<T: Scalar>(&self) -> Result<HoldingCostModel<T>, ValidationError> {
        let mut v = Vec::new();
        let take = |name: &str, field: Option<f64>, used: bool, v: &mut Vec<Violation>| -> Option<T> {
            match (field, used) {
                (Some(x), true) => Some(T::lit(x)),
                (None, true) => {
                    v.push(Violation::new(Condition::Structure, None, format!("holding kind needs field `{name}`")));
                    None
                }
                (Some(_), false) => {
                    v.push(Violation::new(
                        Condition::Structure,
                        None,
                        format!("field `{name}` does not apply to this holding kind"),
                    ));
                    None
                }
                (None, false) => None,
            }
        };
        let pl = self.kind == HoldingTag::PiecewiseLinear;
        let quad = self.kind == HoldingTag::Quadratic;
        let poly = self.kind == HoldingTag::ConvexPoly;
        let beta1 = take("beta1", self.beta1, pl, &mut v);
        let beta2 = take("beta2", self.beta2, pl, &mut v);
        let beta = take("beta", self.beta, quad, &mut v);
        for (name, field) in [("positive", &self.positive), ("negative", &self.negative)] {
            match (field.is_some(), poly) {
                (false, true) => {
                    v.push(Violation::new(Condition::Structure, None, format!("holding kind needs field `{name}`")))
                }
                (true, false) => v.push(Violation::new(
                    Condition::Structure,
                    None,
                    format!("field `{name}` does not apply to this holding kind"),
                )),
                _ => {}
            }
        }
        if !v.is_empty() {
            return Err(ValidationError { violations: v, grid: None });
        }
        let lift = |c: &Option<Vec<f64>>| c.as_ref().map(|c| c.iter().map(|&x| T::lit(x)).collect::<Vec<T>>());
        let kind = match self.kind {
            HoldingTag::PiecewiseLinear => HoldingKind::PiecewiseLinear {
                beta1: beta1.expect("checked"),
                beta2: beta2.expect("checked"),
            },
            HoldingTag::Quadratic => HoldingKind::Quadratic { beta: beta.expect("checked") },
            HoldingTag::ConvexPoly => HoldingKind::ConvexPoly {
                positive: lift(&self.positive).expect("checked"),
                negative: lift(&self.negative).expect("checked"),
            },
        };
        let bound = self.bound.map(|b| PolyBound { degree: b.a, b0: T::lit(b.b0), b1: T::lit(b.b1) });
        HoldingCostModel::new(kind, bound)
    }
}

impl SetupDocument {
    fn validate<T: Scalar>(&self) -> Result<SetupCostModel<T>, ValidationError> {
        let misplaced = |name: &str| {
            Violation::new(Condition::Structure, None, format!("field `{name}` does not apply to this setup kind"))
        };
        let missing =
            |name: &str| Violation::new(Condition::Structure, None, format!("setup kind needs field `{name}`"));
        match self.kind {
            SetupTag::Constant => {
                let mut v = Vec::new();
                if self.breakpoints.is_some() {
                    v.push(misplaced("breakpoints"));
                }
                if self.values.is_some() {
                    v.push(misplaced("values"));
                }
                match self.kappa {
                    Some(kappa) if v.is_empty() => SetupCostModel::constant(T::lit(kappa)),
                    Some(_) => Err(ValidationError { violations: v, grid: None }),
                    None => {
                        v.push(missing("kappa"));
                        Err(ValidationError { violations: v, grid: None })
                    }
                }
            }
            SetupTag::Step => {
                let mut v = Vec::new();
                if self.kappa.is_some() {
                    v.push(misplaced("kappa"));
                }
                if self.values.is_none() {
                    v.push(missing("values"));
                }
                if !v.is_empty() {
                    return Err(ValidationError { violations: v, grid: None });
                }
                let lift = |c: &[f64]| c.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
                SetupCostModel::step(
                    lift(self.breakpoints.as_deref().unwrap_or(&[])),
                    lift(self.values.as_deref().expect("checked")),
                )
            }
        }
    }
}
