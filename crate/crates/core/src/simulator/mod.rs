//! Monte Carlo simulation of inventory policies under Brownian demand:
//! `(s, S)`, base stock (exact reflection) and the order-up-to-bounded
//! modification of either, with per-replication cost ledgers.

mod engine;
mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BrownianDemand, ProblemInstance};
use crate::scalar::Scalar;

pub use engine::{generate_path, replication_rng, run_policy, CostLedger, CouplingStats, PolicyRun, TrajectoryPoint};
pub use stats::{jackknife_std_error, ks_test, normal_cdf, KsOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("base stock has infinite cost when small orders carry a fixed fee")]
    InfiniteCost,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig<T> {
    pub horizon: T,
    pub dt: T,
    pub seed: u64,
    pub replications: u64,
    /// Fraction of the horizon discarded before costs are counted.
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    /// Overrides the default starting level (`S` for `(s, S)`, `s` for base stock).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_level: Option<T>,
    /// Spacing of the level snapshots kept for distribution tests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<T>,
}

fn default_burn_in() -> f64 {
    0.1
}

impl<T: Scalar> PathConfig<T> {
    pub fn new(horizon: T, dt: T, seed: u64, replications: u64) -> Self {
        Self { horizon, dt, seed, replications, burn_in: default_burn_in(), initial_level: None, sample_every: None }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: String| Err(SimulationError::InvalidConfig(m));
        if !(self.horizon > T::zero() && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive and finite, got {}", self.horizon));
        }
        if !(self.dt > T::zero()) || self.dt > self.horizon / T::lit(1e4) {
            return bad(format!("dt must lie in (0, horizon/1e4], got {}", self.dt));
        }
        if self.replications < 1 {
            return bad("at least one replication is required".into());
        }
        if !(0.0..0.5).contains(&self.burn_in) {
            return bad(format!("burn_in must lie in [0, 0.5), got {}", self.burn_in));
        }
        if let Some(x) = self.initial_level {
            if !x.is_finite() {
                return bad("initial level must be finite".into());
            }
        }
        if let Some(e) = self.sample_every {
            if !(e > T::zero() && e.is_finite()) {
                return bad("sample spacing must be positive".into());
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().to_usize().unwrap_or(0)
    }

    pub fn burn_in_steps(&self) -> usize {
        (self.burn_in * self.steps() as f64).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec<T> {
    Ss {
        s: T,
        #[serde(rename = "S")]
        big_s: T,
    },
    BaseStock {
        s: T,
    },
    BoundedModification {
        base: Box<PolicySpec<T>>,
        m: T,
    },
}

impl<T: Scalar> PolicySpec<T> {
    pub fn ss(s: T, big_s: T) -> Self {
        PolicySpec::Ss { s, big_s }
    }

    pub fn bounded(base: PolicySpec<T>, m: T) -> Self {
        PolicySpec::BoundedModification { base: Box::new(base), m }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: String| Err(SimulationError::InvalidPolicy(m));
        match self {
            PolicySpec::Ss { s, big_s } => {
                if !(s.is_finite() && big_s.is_finite()) {
                    return bad("levels must be finite".into());
                }
                if s > big_s {
                    return bad(format!("s = {s} exceeds S = {big_s}"));
                }
            }
            PolicySpec::BaseStock { s } if !s.is_finite() => return bad("level must be finite".into()),
            PolicySpec::BaseStock { .. } => {}
            PolicySpec::BoundedModification { base, m } => {
                if !(*m >= T::one() && m.fract() == T::zero() && m.is_finite()) {
                    return bad(format!("bound m must be an integer ≥ 1, got {m}"));
                }
                if matches!(**base, PolicySpec::BoundedModification { .. }) {
                    return bad("bounded modifications cannot be nested".into());
                }
                base.validate()?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CostComponents {
    pub holding: f64,
    pub setup: f64,
    pub proportional: f64,
}

impl CostComponents {
    fn of(l: &CostLedger) -> Self {
        Self { holding: l.holding / l.window, setup: l.setup / l.window, proportional: l.proportional / l.window }
    }

    pub fn total(&self) -> f64 {
        self.holding + self.setup + self.proportional
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationSummary {
    pub replication: u64,
    pub avg_cost: f64,
    pub components: CostComponents,
    pub cycles: usize,
    pub min_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationEstimate<T> {
    pub avg_cost: f64,
    pub components: CostComponents,
    /// Jackknife error over replications; `None` for a single replication.
    pub std_error: Option<f64>,
    pub cycles: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_cycle_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_length_std_error: Option<f64>,
    pub dt: T,
    pub horizon: T,
    pub seed: u64,
    /// Stream index of each replication under the master seed.
    pub streams: Vec<u64>,
    pub replications: Vec<ReplicationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingStats>,
}

/// All replications of `policy`, in replication order.
pub fn simulate_replications<T: Scalar>(
    policy: &PolicySpec<T>,
    config: &PathConfig<T>,
    instance: &ProblemInstance<T>,
) -> Result<Vec<PolicyRun>, SimulationError> {
    config.validate()?;
    policy.validate()?;
    (0..config.replications)
        .into_par_iter()
        .map(|r| run_policy(policy, config, instance, r, None))
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn summarise<T: Scalar>(config: &PathConfig<T>, runs: &[PolicyRun], ledger: impl Fn(&PolicyRun) -> CostLedger) -> SimulationEstimate<T> {
    let comps: Vec<CostComponents> = runs.iter().map(|r| CostComponents::of(&ledger(r))).collect();
    let totals: Vec<f64> = comps.iter().map(CostComponents::total).collect();
    let components = CostComponents {
        holding: mean(&comps.iter().map(|c| c.holding).collect::<Vec<_>>()),
        setup: mean(&comps.iter().map(|c| c.setup).collect::<Vec<_>>()),
        proportional: mean(&comps.iter().map(|c| c.proportional).collect::<Vec<_>>()),
    };
    let all_cycles: Vec<f64> = runs.iter().flat_map(|r| r.cycle_lengths.iter().copied()).collect();
    let per_rep_cycle: Vec<f64> =
        runs.iter().filter(|r| !r.cycle_lengths.is_empty()).map(|r| mean(&r.cycle_lengths)).collect();
    let coupling = runs.iter().filter_map(|r| r.coupling).reduce(|a, b| CouplingStats {
        checked: a.checked + b.checked,
        dominance_violations: a.dominance_violations + b.dominance_violations,
        shortage_violations: a.shortage_violations + b.shortage_violations,
        matched_jumps: a.matched_jumps + b.matched_jumps,
        capped_jumps: a.capped_jumps + b.capped_jumps,
        zero_hit_jumps: a.zero_hit_jumps + b.zero_hit_jumps,
    });
    SimulationEstimate {
        avg_cost: components.total(),
        components,
        std_error: jackknife_std_error(&totals),
        cycles: all_cycles.len(),
        mean_cycle_length: (!all_cycles.is_empty()).then(|| mean(&all_cycles)),
        cycle_length_std_error: jackknife_std_error(&per_rep_cycle),
        dt: config.dt,
        horizon: config.horizon,
        seed: config.seed,
        streams: runs.iter().map(|r| r.replication).collect(),
        replications: runs
            .iter()
            .zip(&comps)
            .map(|(r, c)| ReplicationSummary {
                replication: r.replication,
                avg_cost: c.total(),
                components: *c,
                cycles: r.cycle_lengths.len(),
                min_level: r.min_level,
            })
            .collect(),
        coupling,
    }
}

/// Aggregates finished runs into an estimate of the simulated policy's cost.
pub fn estimate_from_runs<T: Scalar>(config: &PathConfig<T>, runs: &[PolicyRun]) -> SimulationEstimate<T> {
    summarise(config, runs, |r| r.ledger)
}

/// Time-average cost after burn-in, averaged over replications.
pub fn estimate_ac<T: Scalar>(
    policy: &PolicySpec<T>,
    config: &PathConfig<T>,
    instance: &ProblemInstance<T>,
) -> Result<SimulationEstimate<T>, SimulationError> {
    let runs = simulate_replications(policy, config, instance)?;
    Ok(estimate_from_runs(config, &runs))
}

/// `P[Z(t) > v]` for demand reflected at `m`, started from `x`.
///
/// Uses the reflection principle for drifted Brownian motion; the second
/// argument carries the `2m` shift that makes `v = m` start at probability one.
pub fn reflected_tail_oracle<T: Scalar>(demand: &BrownianDemand<T>, v: T, t: T, m: T, x: T) -> Result<f64, SimulationError> {
    if !(t > T::zero()) {
        return Err(SimulationError::InvalidConfig(format!("time must be positive, got {t}")));
    }
    let (v, t, m, x) = (v.to_f64_lossy(), t.to_f64_lossy(), m.to_f64_lossy(), x.to_f64_lossy());
    if v < m {
        return Ok(1.0);
    }
    let mu = demand.mu().to_f64_lossy();
    let sigma = demand.sigma().to_f64_lossy();
    let lambda = demand.lambda().to_f64_lossy();
    let start = x.max(m);
    let root = sigma * t.sqrt();
    let direct = normal_cdf((-v + start - mu * t) / root);
    let reflected = (-lambda * (v - m)).exp() * normal_cdf((-v - start + 2.0 * m + mu * t) / root);
    Ok((direct + reflected).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub m: f64,
    pub ac_m: f64,
    pub ac: f64,
    pub std_error_m: Option<f64>,
    pub std_error: Option<f64>,
    /// `√(se_m² + se²)`, zero for a single replication.
    pub combined_std_error: f64,
    /// `4μK̄/m`.
    pub bound: f64,
    /// `AC_m − AC`.
    pub gap: f64,
    pub holds: bool,
    pub coupling: CouplingStats,
}

impl ComparisonRow {
    pub fn coupling_ok(&self) -> bool {
        self.coupling.dominance_violations == 0 && self.coupling.shortage_violations == 0
    }
}

/// For each bound `m`, simulates the base policy together with its bounded
/// modification on common paths and checks `AC_m ≤ AC + 4μK̄/m + 3·se`.
pub fn comparison_experiment<T: Scalar>(
    base: &PolicySpec<T>,
    m_list: &[T],
    config: &PathConfig<T>,
    instance: &ProblemInstance<T>,
) -> Result<Vec<ComparisonRow>, SimulationError> {
    if matches!(base, PolicySpec::BoundedModification { .. }) {
        return Err(SimulationError::InvalidPolicy("the base policy must not be a bounded modification".into()));
    }
    let mu = instance.mu().to_f64_lossy();
    let k_bar = instance.setup().sup().to_f64_lossy();
    m_list
        .iter()
        .map(|&m| {
            let policy = PolicySpec::bounded(base.clone(), m);
            let runs = simulate_replications(&policy, config, instance)?;
            let modified = summarise(config, &runs, |r| r.ledger);
            let original = summarise(config, &runs, |r| r.base_ledger.expect("coupled run"));
            let combined = modified.std_error.unwrap_or(0.0).hypot(original.std_error.unwrap_or(0.0));
            let bound = 4.0 * mu * k_bar / m.to_f64_lossy();
            Ok(ComparisonRow {
                m: m.to_f64_lossy(),
                ac_m: modified.avg_cost,
                ac: original.avg_cost,
                std_error_m: modified.std_error,
                std_error: original.std_error,
                combined_std_error: combined,
                bound,
                gap: modified.avg_cost - original.avg_cost,
                holds: modified.avg_cost <= original.avg_cost + bound + 3.0 * combined,
                coupling: modified.coupling.unwrap_or_default(),
            })
        })
        .collect()
}
