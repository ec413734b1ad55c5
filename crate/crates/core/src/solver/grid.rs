use rayon::prelude::*;
use serde::Serialize;

use super::SolverError;
use crate::analytics::{AnalyticsContext, AnalyticsError};
use crate::numerics::golden_section_min;
use crate::scalar::{Extended, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub log_points: usize,
    pub uniform_points: usize,
    /// Log-spaced points reach down to `a + (b − a)·10^{−decades}`.
    pub decades: f64,
    pub golden_iterations: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { log_points: 512, uniform_points: 512, decades: 8.0, golden_iterations: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint<T> {
    pub xi: T,
    pub theta: T,
    pub s: T,
    #[serde(rename = "S")]
    pub big_s: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridOutcome<T> {
    pub best: GridPoint<T>,
    pub xi_max: T,
    pub cells: usize,
    pub evaluations: usize,
    pub config: GridConfig,
    /// Other points whose cost ties the best within tolerance.
    pub alternates: Vec<GridPoint<T>>,
}

/// `θ` on the open cell `(a, b)` where the fee is `fee`, so the breakpoint
/// rule never applies inside.
fn theta_in_cell<T: Scalar>(ctx: &AnalyticsContext<T>, xi: T, fee: T) -> Result<GridPoint<T>, AnalyticsError> {
    let inst = ctx.instance();
    let mu = inst.mu();
    let m = ctx.matched_levels(xi)?;
    let area = ctx.integral_g0(m.s_tilde, m.big_s_tilde, None)?;
    let theta = inst.ordering.k * mu + fee * mu / xi + mu / xi * area;
    Ok(GridPoint { xi, theta, s: m.s_tilde, big_s: m.big_s_tilde })
}

fn theta_point<T: Scalar>(ctx: &AnalyticsContext<T>, xi: T) -> Result<Option<GridPoint<T>>, AnalyticsError> {
    let (theta, m) = ctx.theta_with_levels(xi)?;
    Ok(theta.finite().map(|theta| GridPoint { xi, theta, s: m.s_tilde, big_s: m.big_s_tilde }))
}

/// Direct minimisation of `θ` over order sizes: dense log + uniform grids on
/// every continuity cell of `K`, the breakpoints themselves, `ξ = 0` when
/// small orders are free, and golden-section refinement around each cell's
/// best grid point.
pub fn grid_search<T: Scalar>(ctx: &AnalyticsContext<T>, config: &GridConfig, tie_tol: T) -> Result<GridOutcome<T>, SolverError> {
    let setup = ctx.instance().setup();
    let mu = ctx.instance().mu();
    let breakpoints = setup.breakpoints().to_vec();
    let k_bar = setup.sup();

    // seeds: breakpoints, the origin if allowed, and a unit order
    let mut seeds: Vec<GridPoint<T>> = Vec::new();
    let mut evaluations = 0usize;
    let last_q = breakpoints.last().copied().unwrap_or_else(T::zero);
    let mut probes: Vec<T> = breakpoints.clone();
    if !setup.ell().is_infinite() {
        probes.push(T::zero());
    }
    probes.push(last_q + T::one());
    for xi in probes {
        evaluations += 1;
        if let Some(p) = theta_point(ctx, xi)? {
            seeds.push(p);
        }
    }
    let incumbent = seeds
        .iter()
        .copied()
        .min_by(|a, b| a.theta.partial_cmp(&b.theta).expect("finite costs"))
        .ok_or(SolverError::NoFiniteCost)?;

    // beyond ξ_max the mean of g0 over the matched window alone exceeds the incumbent
    let mut xi_max = T::lit(8.0) * incumbent.xi.max(last_q).max(T::one());
    loop {
        evaluations += 1;
        match ctx.theta(xi_max)? {
            Extended::Finite(t) if t - k_bar * mu / xi_max > incumbent.theta => break,
            _ => xi_max *= T::lit(2.0),
        }
        if !xi_max.is_finite() {
            return Err(SolverError::NoFiniteCost);
        }
    }

    let mut edges = vec![T::zero()];
    edges.extend(breakpoints.iter().copied().filter(|&q| q < xi_max));
    edges.push(xi_max);
    let cells: Vec<(T, T, T)> = edges
        .windows(2)
        .map(|w| (w[0], w[1], setup.eval_nonneg((w[0] + w[1]) * T::lit(0.5))))
        .collect();

    let per_cell: Vec<(Vec<GridPoint<T>>, usize)> = cells
        .par_iter()
        .map(|&(a, b, fee)| scan_cell(ctx, a, b, fee, config))
        .collect::<Result<_, _>>()?;

    // local winners: each seed and the best point of each cell
    let mut winners = seeds;
    for (pts, n) in per_cell {
        evaluations += n;
        if let Some(p) = pts.into_iter().min_by(|p, q| p.theta.partial_cmp(&q.theta).expect("finite")) {
            winners.push(p);
        }
    }
    winners.sort_by(|p, q| p.xi.partial_cmp(&q.xi).expect("finite sizes"));
    let min_theta = winners.iter().map(|p| p.theta).fold(T::infinity(), T::min);
    let tied = |p: &GridPoint<T>| p.theta - min_theta <= tie_tol * (T::one() + min_theta.abs());
    // smallest order size among (near-)equal minimisers
    let best = *winners.iter().find(|p| tied(p)).expect("nonempty");
    let alternates = winners
        .iter()
        .filter(|p| p.xi != best.xi && tied(p))
        .copied()
        .collect();
    Ok(GridOutcome { best, xi_max, cells: cells.len(), evaluations, config: *config, alternates })
}

fn scan_cell<T: Scalar>(
    ctx: &AnalyticsContext<T>,
    a: T,
    b: T,
    fee: T,
    config: &GridConfig,
) -> Result<(Vec<GridPoint<T>>, usize), SolverError> {
    let width = b - a;
    let mut xs = Vec::with_capacity(config.log_points + config.uniform_points + 1);
    let nl = config.log_points.max(2);
    for j in 0..config.log_points {
        let e = -config.decades + config.decades * j as f64 / (nl - 1) as f64;
        xs.push(a + width * T::lit(10f64.powf(e)));
    }
    let nu = config.uniform_points.max(1);
    for j in 0..config.uniform_points {
        xs.push(a + width * T::lit((j as f64 + 0.5) / nu as f64));
    }
    // the right end of the last cell is included; interior ends are breakpoints
    xs.push(b);
    xs.retain(|&x| x > a && x <= b);
    xs.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
    xs.dedup();
    let mut pts = Vec::with_capacity(xs.len());
    for &x in &xs {
        // at an interior breakpoint the fee may differ; that point is seeded separately
        if x == b && ctx.instance().setup().breakpoints().contains(&b) {
            continue;
        }
        pts.push(theta_in_cell(ctx, x, fee)?);
    }
    let mut evaluations = pts.len();
    if pts.is_empty() {
        return Ok((pts, evaluations));
    }
    let i = pts
        .iter()
        .enumerate()
        .min_by(|(_, p), (_, q)| p.theta.partial_cmp(&q.theta).expect("finite"))
        .map(|(i, _)| i)
        .expect("nonempty");
    let left = if i == 0 { a + width * T::lit(1e-12) } else { pts[i - 1].xi };
    let right = if i + 1 == pts.len() { pts[i].xi } else { pts[i + 1].xi };
    if right > left {
        let mut count = 0usize;
        let m = golden_section_min(
            |x: T| {
                count += 1;
                theta_in_cell(ctx, x, fee).map(|p| p.theta)
            },
            left,
            right,
            T::epsilon().sqrt(),
            config.golden_iterations,
        )?;
        evaluations += count;
        pts.push(theta_in_cell(ctx, m.x, fee)?);
    }
    Ok((pts, evaluations))
}
