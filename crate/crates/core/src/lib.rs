//! Optimal (s, S) ordering under Brownian demand with quantity-dependent
//! setup costs.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). The type
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! command-line tool uses; the `F32` variants exist for callers that want
//! single precision.

// `!(x > 0)` is how NaN gets rejected alongside nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod model;
pub mod numerics;
pub mod scalar;
pub mod simulator;
pub mod solver;

pub use scalar::{Extended, Scalar};

pub type ProblemInstance = model::ProblemInstance<f64>;
pub type HoldingCostModel = model::HoldingCostModel<f64>;
pub type SetupCostModel = model::SetupCostModel<f64>;
pub type OrderingCostModel = model::OrderingCostModel<f64>;
pub type BrownianDemand = model::BrownianDemand<f64>;
pub type AnalyticsContext = analytics::AnalyticsContext<f64>;
pub type SolveResult = solver::SolveResult<f64>;
pub type SimulationEstimate = simulator::SimulationEstimate<f64>;

pub type ProblemInstanceF32 = model::ProblemInstance<f32>;
pub type AnalyticsContextF32 = analytics::AnalyticsContext<f32>;
pub type SolveResultF32 = solver::SolveResult<f32>;
