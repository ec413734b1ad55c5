use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{PathConfig, PolicySpec, SimulationError};
use crate::model::ProblemInstance;
use crate::scalar::Scalar;

/// Costs accumulated over the measurement window (after burn-in).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CostLedger {
    pub holding: f64,
    pub setup: f64,
    pub proportional: f64,
    /// Length of the measurement window.
    pub window: f64,
}

impl CostLedger {
    pub fn total(&self) -> f64 {
        self.holding + self.setup + self.proportional
    }

    pub fn average(&self) -> f64 {
        self.total() / self.window
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CouplingStats {
    pub checked: usize,
    /// Grid points with `Z_m > Z`.
    pub dominance_violations: usize,
    /// Grid points with `Z_m < 0` and `Z_m ≠ Z`.
    pub shortage_violations: usize,
    pub matched_jumps: usize,
    pub capped_jumps: usize,
    pub zero_hit_jumps: usize,
}

/// One replication of one policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyRun {
    pub replication: u64,
    /// Ledger of the simulated policy (the modified one for a bounded modification).
    pub ledger: CostLedger,
    /// Ledger of the underlying policy on the same path, for a bounded modification.
    pub base_ledger: Option<CostLedger>,
    pub coupling: Option<CouplingStats>,
    /// Times between consecutive orders of an `(s, S)` base policy, after burn-in.
    pub cycle_lengths: Vec<f64>,
    /// Smallest inventory level at grid times after burn-in.
    pub min_level: f64,
    /// Level snapshots taken every `sample_every` time units after burn-in.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub z: f64,
    pub y: f64,
    pub cumulative_cost: f64,
    /// Level of the underlying policy when simulating a bounded modification.
    pub z_base: Option<f64>,
}

#[derive(Clone, Copy)]
enum Base<T> {
    Ss { s: T, big_s: T },
    Reflect { s: T },
}

/// RNG for replication `r`: the master seed picks the key, `r` the stream.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Exact `N(−μ dt, σ² dt)` demand increments for one replication.
pub fn generate_path<T: Scalar>(config: &PathConfig<T>, instance: &ProblemInstance<T>, replication: u64) -> Vec<T> {
    let mut rng = replication_rng(config.seed, replication);
    let drift = -instance.mu() * config.dt;
    let sd = instance.demand.sigma() * config.dt.sqrt();
    (0..config.steps()).map(|_| drift + sd * T::sample_standard_normal(&mut rng)).collect()
}

/// Simulates one replication of `policy`, calling `observe` every `stride`
/// steps (and at time zero) when given.
pub fn run_policy<T: Scalar>(
    policy: &PolicySpec<T>,
    config: &PathConfig<T>,
    instance: &ProblemInstance<T>,
    replication: u64,
    mut observe: Option<(&mut dyn FnMut(TrajectoryPoint), usize)>,
) -> Result<PolicyRun, SimulationError> {
    policy.validate()?;
    config.validate()?;
    let (base, m) = match *policy {
        PolicySpec::Ss { s, big_s } if s == big_s => (Base::Reflect { s }, None),
        PolicySpec::Ss { s, big_s } => (Base::Ss { s, big_s }, None),
        PolicySpec::BaseStock { s } => (Base::Reflect { s }, None),
        PolicySpec::BoundedModification { ref base, m } => match **base {
            PolicySpec::Ss { s, big_s } if s == big_s => (Base::Reflect { s }, Some(m)),
            PolicySpec::Ss { s, big_s } => (Base::Ss { s, big_s }, Some(m)),
            PolicySpec::BaseStock { s } => (Base::Reflect { s }, Some(m)),
            PolicySpec::BoundedModification { .. } => {
                return Err(SimulationError::InvalidPolicy("bounded modifications cannot be nested".into()))
            }
        },
    };
    let setup = instance.setup();
    let k = instance.ordering.k.to_f64_lossy();
    let ell = setup.ell();
    let continuous_rate = match base {
        Base::Reflect { .. } => match ell.finite() {
            Some(l) => k + l.to_f64_lossy(),
            None => return Err(SimulationError::InfiniteCost),
        },
        Base::Ss { .. } => 0.0,
    };
    let fee = |q: T| setup.eval_nonneg(q).to_f64_lossy();
    let h = |z: T| instance.holding.eval(z).to_f64_lossy();

    let dt = config.dt;
    let dt64 = dt.to_f64_lossy();
    let steps = config.steps();
    let burn = config.burn_in_steps();
    let sigma2_dt = instance.demand.sigma2() * dt;
    let drift = -instance.mu() * dt;
    let sd = sigma2_dt.sqrt();
    let half = T::lit(0.5);
    let tol = T::lit(1e-9);

    let start = config.initial_level.unwrap_or(match base {
        Base::Ss { big_s, .. } => big_s,
        Base::Reflect { s } => s,
    });
    let mut rng = replication_rng(config.seed, replication);

    let mut z = start;
    let mut zm = start;
    let mut y = T::zero();
    let mut ym = T::zero();
    let mut main = CostLedger::default();
    let mut shadow = CostLedger::default();
    let mut cumulative = 0.0;
    let mut coupling = CouplingStats::default();
    let mut cycle_lengths = Vec::new();
    let mut last_order: Option<f64> = None;
    let mut min_level = f64::INFINITY;
    let mut samples = Vec::new();
    let sample_every = config.sample_every.map(|s| ((s / dt).round().to_usize().unwrap_or(1)).max(1));

    // orders at time zero
    let charge = |ledger: &mut CostLedger, counting: bool, setup_cost: f64, qty: f64| {
        if counting {
            ledger.setup += setup_cost;
            ledger.proportional += k * qty;
        }
    };
    let counting0 = burn == 0;
    match base {
        Base::Ss { s, big_s } if z <= s => {
            let dy = big_s - z;
            z += dy;
            y += dy;
            charge(&mut shadow, counting0, fee(big_s - s), dy.to_f64_lossy());
            cumulative += fee(big_s - s) + k * dy.to_f64_lossy();
        }
        Base::Reflect { s } if z < s => {
            let dy = s - z;
            z += dy;
            y += dy;
            charge(&mut shadow, counting0, fee(dy), dy.to_f64_lossy());
            cumulative += fee(dy) + k * dy.to_f64_lossy();
        }
        _ => {}
    }
    if let Some(m) = m {
        // the modified policy only follows the time-zero order up to the bound
        let dy = z - zm;
        if dy > T::zero() && zm <= m * half {
            let j = if zm + dy <= m { dy } else { m - zm };
            zm += j;
            ym += j;
        }
    } else {
        zm = z;
        ym = y;
    }
    let coupled = m.is_some();
    if let Some((f, _)) = observe.as_mut() {
        f(TrajectoryPoint {
            t: 0.0,
            z: zm.to_f64_lossy(),
            y: ym.to_f64_lossy(),
            cumulative_cost: cumulative,
            z_base: coupled.then(|| z.to_f64_lossy()),
        });
    }

    for i in 0..steps {
        let counting = i >= burn;
        let dx = drift + sd * T::sample_standard_normal(&mut rng);
        let z0 = z;
        let zm0 = zm;
        z += dx;
        zm += dx;

        // continuous ordering of a base-stock policy: exact reflection using
        // the minimum of the Brownian bridge over the step
        let mut dyc = T::zero();
        if let Base::Reflect { s } = base {
            let u = T::sample_open01(&mut rng);
            let bridge_min = half * (dx - (dx * dx - T::lit(2.0) * sigma2_dt * u.ln()).sqrt());
            let low = z0 + bridge_min;
            if low < s {
                dyc = s - low;
                z += dyc;
                y += dyc;
            }
        }
        let dyc64 = dyc.to_f64_lossy();
        if counting {
            shadow.setup += (continuous_rate - k) * dyc64;
            shadow.proportional += k * dyc64;
        }

        let mut step_cost_main = 0.0;
        if let Some(m) = m {
            if dyc > T::zero() && zm0 <= m {
                zm += dyc;
                ym += dyc;
                step_cost_main += continuous_rate * dyc64;
                if counting {
                    main.setup += (continuous_rate - k) * dyc64;
                    main.proportional += k * dyc64;
                }
            }
            // zero crossing inside the step: jump to the base level at the
            // crossing (capped at m) and carry the rest of the increment
            if zm0 > T::zero() && zm <= T::zero() && z > zm {
                let target = z.min(m + zm);
                let jump = target - zm;
                if jump > T::zero() {
                    zm = target;
                    ym += jump;
                    coupling.zero_hit_jumps += 1;
                    let c = fee(jump);
                    let q = jump.to_f64_lossy();
                    step_cost_main += c + k * q;
                    charge(&mut main, counting, c, q);
                }
            }
        } else {
            step_cost_main += continuous_rate * dyc64;
        }

        // holding over the step, trapezoid between post-jump and pre-jump values
        if counting {
            shadow.holding += half.to_f64_lossy() * (h(z0) + h(z)) * dt64;
            if coupled {
                main.holding += 0.5 * (h(zm0) + h(zm)) * dt64;
            }
        }
        let held_main = if coupled { 0.5 * (h(zm0) + h(zm)) } else { 0.5 * (h(z0) + h(z)) };
        step_cost_main += held_main * dt64;

        // jump of the base (s, S) policy at the grid point
        if let Base::Ss { s, big_s } = base {
            if z <= s {
                let dy = big_s - z;
                z += dy;
                y += dy;
                let c = fee(big_s - s);
                let q = dy.to_f64_lossy();
                charge(&mut shadow, counting, c, q);
                let t = (i + 1) as f64 * dt64;
                if counting {
                    if let Some(prev) = last_order {
                        cycle_lengths.push(t - prev);
                    }
                    last_order = Some(t);
                }
                match m {
                    None => step_cost_main += c + k * q,
                    Some(m) => {
                        if zm > m * half {
                            // no jump
                        } else if zm + dy <= m {
                            zm += dy;
                            ym += dy;
                            coupling.matched_jumps += 1;
                            step_cost_main += c + k * q;
                            charge(&mut main, counting, c, q);
                        } else {
                            let j = m - zm;
                            zm = m;
                            ym += j;
                            coupling.capped_jumps += 1;
                            let cj = fee(j);
                            let qj = j.to_f64_lossy();
                            step_cost_main += cj + k * qj;
                            charge(&mut main, counting, cj, qj);
                        }
                    }
                }
            }
        }
        cumulative += step_cost_main;

        if !coupled {
            zm = z;
            ym = y;
        } else if counting {
            coupling.checked += 1;
            let scale = T::one() + z.abs();
            if zm > z + tol * scale {
                coupling.dominance_violations += 1;
            }
            if zm < T::zero() && (zm - z).abs() > tol * scale {
                coupling.shortage_violations += 1;
            }
        }
        if counting {
            min_level = min_level.min(zm.to_f64_lossy());
            if let Some(every) = sample_every {
                if (i + 1 - burn).is_multiple_of(every) {
                    samples.push(zm.to_f64_lossy());
                }
            }
        }
        if let Some((f, stride)) = observe.as_mut() {
            if (i + 1) % *stride == 0 || i + 1 == steps {
                f(TrajectoryPoint {
                    t: (i + 1) as f64 * dt64,
                    z: zm.to_f64_lossy(),
                    y: ym.to_f64_lossy(),
                    cumulative_cost: cumulative,
                    z_base: coupled.then(|| z.to_f64_lossy()),
                });
            }
        }
    }
    let window = (steps - burn) as f64 * dt64;
    main.window = window;
    shadow.window = window;
    let (ledger, base_ledger) = if coupled { (main, Some(shadow)) } else { (shadow, None) };
    Ok(PolicyRun {
        replication,
        ledger,
        base_ledger,
        coupling: coupled.then_some(coupling),
        cycle_lengths,
        min_level,
        samples,
    })
}
