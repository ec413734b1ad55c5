//! Optimal `(s*, S*, ν*)`: exact solvers for constant and step setup costs
//! plus a grid search over order sizes used as an independent check.

mod constant;
mod grid;
mod step;

use serde::Serialize;
use thiserror::Error;

use crate::analytics::{
    AnalyticsContext, AnalyticsError, CertificateConfig, CertificateReport, QuadratureConfig, RootConfig,
};
use crate::model::SetupKind;
use crate::numerics::{QuadratureError, RootError};
use crate::scalar::Scalar;

pub use constant::{solve_constant, ConstantKSolution, ConstantResiduals};
pub use grid::{grid_search, GridConfig, GridOutcome, GridPoint};
pub use step::{candidate_table, CandidateRow, CandidateTable, Membership};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("setup fee must be nonnegative and finite, got {0}")]
    InvalidFee(f64),
    #[error("internal error: no piece of the setup cost is a candidate")]
    EmptyCandidateSet,
    #[error("internal error: pruned piece {n} is not dominated by a neighbouring candidate")]
    PruningViolated { n: usize },
    #[error("no order size with finite average cost was found")]
    NoFiniteCost,
    #[error("method {0} does not apply to this setup cost")]
    MethodMismatch(&'static str),
}

impl From<QuadratureError> for SolverError {
    fn from(e: QuadratureError) -> Self {
        SolverError::Analytics(e.into())
    }
}

impl From<RootError> for SolverError {
    fn from(e: RootError) -> Self {
        SolverError::Analytics(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BaseStock,
    ConstantK,
    StepAlgorithm,
    Grid,
}

/// Which solver `solve` should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Exact solver for the setup kind.
    #[default]
    Auto,
    /// The piecewise algorithm; a constant fee is treated as one piece.
    Step,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOptions<T> {
    pub method: MethodChoice,
    /// Also run the grid search and report the gap.
    pub cross_check: bool,
    /// Run the certificate with this configuration.
    pub certificate: Option<CertificateConfig<T>>,
    pub grid: GridConfig,
    /// Relative tolerance under which two costs count as tied.
    pub tie_tol: T,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            method: MethodChoice::Auto,
            cross_check: false,
            certificate: Some(CertificateConfig::default()),
            grid: GridConfig::default(),
            tie_tol: T::lit(1e-9).max(T::epsilon() * T::lit(100.0)),
        }
    }
}

/// An alternative policy with (nearly) the same cost as the selected one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alternate<T> {
    /// Piece index for the step algorithm.
    pub n: Option<usize>,
    pub xi: T,
    pub s: T,
    #[serde(rename = "S")]
    pub big_s: T,
    pub nu: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCheck<T> {
    pub nu: T,
    pub s: T,
    #[serde(rename = "S")]
    pub big_s: T,
    pub xi: T,
    /// `ν_grid − ν*`.
    pub gap: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances<T> {
    pub quadrature: QuadratureConfig<T>,
    pub root: RootConfig<T>,
    pub tie: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult<T> {
    pub s_star: T,
    #[serde(rename = "S_star")]
    pub big_s_star: T,
    pub nu_star: T,
    pub xi_star: T,
    pub z_star: T,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<ConstantKSolution<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate_table: Option<CandidateTable<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridOutcome<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_check: Option<GridCheck<T>>,
    pub alternates: Vec<Alternate<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport<T>>,
    pub tolerances: Tolerances<T>,
}

impl<T: Scalar> SolveResult<T> {
    fn bare(ctx: &AnalyticsContext<T>, method: Method, s: T, big_s: T, nu: T, tie: T) -> Self {
        Self {
            s_star: s,
            big_s_star: big_s,
            nu_star: nu,
            xi_star: big_s - s,
            z_star: ctx.z_star(),
            method,
            constant: None,
            candidate_table: None,
            grid: None,
            grid_check: None,
            alternates: Vec::new(),
            certificate: None,
            tolerances: Tolerances { quadrature: ctx.quadrature(), root: ctx.root(), tie },
        }
    }

    pub fn certified(&self) -> Option<bool> {
        self.certificate.as_ref().map(|c| c.passed)
    }
}

fn base_stock<T: Scalar>(ctx: &AnalyticsContext<T>, tie: T) -> Result<SolveResult<T>, SolverError> {
    let z = ctx.z_star();
    let inst = ctx.instance();
    let nu = inst.ordering.k * inst.mu() + inst.mu() * ctx.g0(z)?;
    Ok(SolveResult::bare(ctx, Method::BaseStock, z, z, nu, tie))
}

/// Exact solver for a constant fee.
pub fn solve_constant_result<T: Scalar>(ctx: &AnalyticsContext<T>, tie: T) -> Result<SolveResult<T>, SolverError> {
    let kappa = match ctx.instance().setup().kind() {
        SetupKind::Constant { kappa } => *kappa,
        SetupKind::Step { .. } => return Err(SolverError::MethodMismatch("constant_k")),
    };
    let c = solve_constant(ctx, kappa)?;
    let method = if kappa == T::zero() { Method::BaseStock } else { Method::ConstantK };
    let mut r = SolveResult::bare(ctx, method, c.s_hat, c.big_s_hat, c.nu_hat, tie);
    r.constant = Some(c);
    Ok(r)
}

/// The piecewise algorithm: base stock when `K_1 = 0`, otherwise one
/// constant-fee solve per piece, clamping, candidate selection and the
/// smallest minimising piece index.
pub fn solve_step<T: Scalar>(ctx: &AnalyticsContext<T>, tie: T) -> Result<SolveResult<T>, SolverError> {
    if ctx.instance().setup().first_fee() == T::zero() {
        return base_stock(ctx, tie);
    }
    let table = candidate_table(ctx)?;
    let sel = table.selected();
    let (s, big_s, nu) = (sel.s.expect("candidate"), sel.big_s.expect("candidate"), sel.nu.expect("candidate"));
    let mut r = SolveResult::bare(ctx, Method::StepAlgorithm, s, big_s, nu, tie);
    r.alternates = table
        .rows
        .iter()
        .filter(|row| row.candidate && row.n != table.n_star)
        .filter_map(|row| {
            let v = row.nu?;
            (v - nu <= tie * (T::one() + nu.abs())).then(|| Alternate {
                n: Some(row.n),
                xi: row.xi_star,
                s: row.s.expect("candidate"),
                big_s: row.big_s.expect("candidate"),
                nu: v,
            })
        })
        .collect();
    r.candidate_table = Some(table);
    Ok(r)
}

pub fn solve_grid<T: Scalar>(
    ctx: &AnalyticsContext<T>,
    config: &GridConfig,
    tie: T,
) -> Result<SolveResult<T>, SolverError> {
    let g = grid_search(ctx, config, tie)?;
    let b = g.best;
    let mut r = SolveResult::bare(ctx, Method::Grid, b.s, b.big_s, b.theta, tie);
    r.xi_star = b.xi;
    r.alternates = g
        .alternates
        .iter()
        .map(|p| Alternate { n: None, xi: p.xi, s: p.s, big_s: p.big_s, nu: p.theta })
        .collect();
    r.grid = Some(g);
    Ok(r)
}

/// Dispatches to the solver for the setup kind, then optionally certifies
/// the answer and cross-checks it against the grid search.
pub fn solve<T: Scalar>(ctx: &AnalyticsContext<T>, options: &SolveOptions<T>) -> Result<SolveResult<T>, SolverError> {
    let tie = options.tie_tol;
    let is_constant = matches!(ctx.instance().setup().kind(), SetupKind::Constant { .. });
    let mut result = match options.method {
        MethodChoice::Auto if is_constant => solve_constant_result(ctx, tie)?,
        MethodChoice::Auto | MethodChoice::Step => solve_step(ctx, tie)?,
        MethodChoice::Grid => solve_grid(ctx, &options.grid, tie)?,
    };
    if options.cross_check && result.method != Method::Grid {
        let g = grid_search(ctx, &options.grid, tie)?;
        result.grid_check = Some(GridCheck {
            nu: g.best.theta,
            s: g.best.s,
            big_s: g.best.big_s,
            xi: g.best.xi,
            gap: g.best.theta - result.nu_star,
        });
    }
    if let Some(cfg) = &options.certificate {
        result.certificate = Some(ctx.vstar_certificate(result.s_star, result.big_s_star, result.nu_star, cfg)?);
    }
    Ok(result)
}

#[cfg(test)]
mod tests;
