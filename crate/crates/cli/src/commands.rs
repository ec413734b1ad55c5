use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use ssopt_core::analytics::{AnalyticsError, CertificateConfig, QuadratureConfig, RootConfig};
use ssopt_core::model::{ProblemDocument, ValidationError};
use ssopt_core::simulator::{
    comparison_experiment, estimate_ac, run_policy, PathConfig, PolicySpec, SimulationError, TrajectoryPoint,
};
use ssopt_core::solver::{solve as run_solver, MethodChoice, SolveOptions, SolverError};
use ssopt_core::{AnalyticsContext, Extended, ProblemInstance};

use crate::{Command, CompareArgs, MethodArg, Numerics, SimulateArgs, SimulationArgs, SolveArgs, SweepArgs, VerifyArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_CERTIFICATE: u8 = 3;
pub const EXIT_CONTRADICTION: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            _ => 1,
        }
    }
}

impl From<ValidationError> for CliError {
    fn from(e: ValidationError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::Config(_) | AnalyticsError::InvertedLevels { .. } => CliError::Validation(e.to_string()),
            e => CliError::Solver(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Analytics(a) => a.into(),
            e => CliError::Solver(e.to_string()),
        }
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<(ProblemDocument, ProblemInstance), CliError> {
    let doc = ProblemDocument::from_json_str(&read(path)?)?;
    let inst = doc.validate()?;
    Ok((doc, inst))
}

fn context(instance: ProblemInstance, tol: Option<f64>) -> Result<AnalyticsContext, CliError> {
    let mut quadrature = QuadratureConfig::default();
    let mut root = RootConfig::default();
    if let Some(t) = tol {
        quadrature.tol = t;
        root.tol = t;
    }
    Ok(AnalyticsContext::with_config(instance, quadrature, root)?)
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn emit_json(output: Option<&Path>, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.to_string()))?;
    emit(output, &text)
}

/// Parses `s=<v>,S=<v>` (an `(s, S)` policy) or `s=<v>` (base stock).
pub fn parse_policy(text: &str) -> Result<PolicySpec<f64>, CliError> {
    let bad = |m: String| CliError::Validation(format!("invalid --policy {text:?}: {m}"));
    let (mut s, mut big_s) = (None, None);
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
        let v: f64 = value.trim().parse().map_err(|_| bad(format!("not a number: {value:?}")))?;
        match key.trim() {
            "s" => s = Some(v),
            "S" => big_s = Some(v),
            k => return Err(bad(format!("unknown key {k:?}"))),
        }
    }
    let s = s.ok_or_else(|| bad("missing s".into()))?;
    let policy = match big_s {
        Some(big_s) => PolicySpec::ss(s, big_s),
        None => PolicySpec::BaseStock { s },
    };
    policy.validate()?;
    Ok(policy)
}

fn optimal_policy(ctx: &AnalyticsContext) -> Result<PolicySpec<f64>, CliError> {
    let r = run_solver(ctx, &SolveOptions { certificate: None, ..SolveOptions::default() })?;
    Ok(if r.s_star == r.big_s_star {
        PolicySpec::BaseStock { s: r.s_star }
    } else {
        PolicySpec::ss(r.s_star, r.big_s_star)
    })
}

fn path_config(sim: &SimulationArgs, seed: u64) -> Result<PathConfig<f64>, CliError> {
    let cfg = PathConfig { burn_in: sim.burn_in, ..PathConfig::new(sim.horizon, sim.dt, seed, sim.reps) };
    cfg.validate()?;
    Ok(cfg)
}

fn certificate_config(n: &Numerics) -> CertificateConfig<f64> {
    let mut cfg: CertificateConfig<f64> = CertificateConfig { seed: n.seed, ..CertificateConfig::default() };
    if let Some(t) = n.tol {
        cfg.tol = cfg.tol.max(t);
    }
    cfg
}

pub fn solve(a: &SolveArgs, command: &Command) -> Result<u8, CliError> {
    let (doc, inst) = load_problem(&a.io.input)?;
    let ctx = context(inst, a.numerics.tol)?;
    let options = SolveOptions {
        method: match a.method {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::Step => MethodChoice::Step,
            MethodArg::Grid => MethodChoice::Grid,
        },
        cross_check: a.cross_check,
        certificate: (!a.no_certificate).then(|| certificate_config(&a.numerics)),
        ..SolveOptions::default()
    };
    let result = run_solver(&ctx, &options)?;
    emit_json(
        a.io.output.as_deref(),
        &json!({ "config": command, "options": options, "problem": doc, "result": result }),
    )?;
    Ok(if result.certified() == Some(false) { EXIT_CERTIFICATE } else { EXIT_OK })
}

#[derive(Deserialize)]
struct StoredPolicy {
    s_star: f64,
    #[serde(rename = "S_star")]
    big_s_star: f64,
    nu_star: f64,
}

#[derive(Deserialize)]
struct StoredResult {
    problem: ProblemDocument,
    result: StoredPolicy,
}

pub fn verify(a: &VerifyArgs, command: &Command) -> Result<u8, CliError> {
    let text = read(&a.io.input)?;
    let stored: StoredResult = serde_json::from_str(&text).map_err(|e| {
        CliError::Validation(format!("invalid result file at line {} column {}: {e}", e.line(), e.column()))
    })?;
    let inst = stored.problem.validate()?;
    let ctx = context(inst, a.numerics.tol)?;
    let p = &stored.result;
    let cfg = certificate_config(&a.numerics);
    let report = ctx.vstar_certificate(p.s_star, p.big_s_star, p.nu_star, &cfg)?;
    emit_json(
        a.io.output.as_deref(),
        &json!({ "config": command, "problem": stored.problem, "certificate": report }),
    )?;
    Ok(if report.passed { EXIT_OK } else { EXIT_CERTIFICATE })
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    #[serde(rename = "Z")]
    z: f64,
    #[serde(rename = "Y")]
    y: f64,
    cumulative_cost: f64,
    #[serde(rename = "Z_base", skip_serializing_if = "Option::is_none")]
    z_base: Option<f64>,
}

fn write_trajectory(
    path: &Path,
    policy: &PolicySpec<f64>,
    cfg: &PathConfig<f64>,
    inst: &ProblemInstance,
    stride: usize,
) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut err = None;
    let mut obs = |p: TrajectoryPoint| {
        if err.is_none() {
            let row = TrajectoryRow { t: p.t, z: p.z, y: p.y, cumulative_cost: p.cumulative_cost, z_base: p.z_base };
            err = w.serialize(row).err();
        }
    };
    run_policy(policy, cfg, inst, 0, Some((&mut obs, stride.max(1))))?;
    if let Some(e) = err {
        return Err(io(e));
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn simulate(a: &SimulateArgs, command: &Command) -> Result<u8, CliError> {
    let (doc, inst) = load_problem(&a.io.input)?;
    let ctx = context(inst.clone(), a.numerics.tol)?;
    let base = match &a.policy {
        Some(p) => parse_policy(p)?,
        None => optimal_policy(&ctx)?,
    };
    let policy = match a.m {
        Some(m) => PolicySpec::bounded(base.clone(), m),
        None => base.clone(),
    };
    policy.validate()?;
    let cfg = path_config(&a.sim, a.numerics.seed)?;
    if a.sim_tol.is_nan() || a.sim_tol <= 0.0 {
        return Err(CliError::Validation(format!("--sim-tol must be positive, got {}", a.sim_tol)));
    }
    // the analytic cost is only known for the unmodified policies
    let analytic = match policy {
        PolicySpec::Ss { s, big_s } => Some(ctx.gamma(s, big_s)?),
        PolicySpec::BaseStock { s } => Some(ctx.gamma(s, s)?),
        PolicySpec::BoundedModification { .. } => None,
    };
    if analytic == Some(Extended::Infinite) {
        return Err(CliError::Validation("the policy has infinite average cost".into()));
    }
    let analytic = analytic.and_then(Extended::finite);
    let estimate = estimate_ac(&policy, &cfg, &inst)?;
    if let Some(path) = &a.trajectory {
        write_trajectory(path, &policy, &cfg, &inst, a.stride)?;
    }
    let rel = analytic.map(|g| (estimate.avg_cost - g).abs() / g.abs());
    let consistent = rel.is_none_or(|r| r <= a.sim_tol);
    emit_json(
        a.io.output.as_deref(),
        &json!({
            "config": command,
            "path": cfg,
            "problem": doc,
            "policy": policy,
            "analytic_cost": analytic,
            "estimate": estimate,
            "relative_error": rel,
            "tolerance": a.sim_tol,
            "consistent": consistent,
        }),
    )?;
    if !consistent {
        eprintln!(
            "simulated cost {:.6} differs from analytic {:.6} by more than {}",
            estimate.avg_cost,
            analytic.unwrap_or(f64::NAN),
            a.sim_tol
        );
        return Ok(EXIT_CONTRADICTION);
    }
    Ok(EXIT_OK)
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        v.to_string()
    }
}

pub fn sweep(a: &SweepArgs) -> Result<u8, CliError> {
    let (_, inst) = load_problem(&a.io.input)?;
    let ctx = context(inst, a.tol)?;
    let (lo, hi, n) = (a.xi_min, a.xi_max, a.xi_steps);
    if !(lo >= 0.0 && hi.is_finite() && lo <= hi) || n == 0 {
        return Err(CliError::Validation(format!(
            "empty order-size range: need 0 <= xi-min <= xi-max and xi-steps >= 1, got [{lo}, {hi}] with {n} steps"
        )));
    }
    let xs: Vec<f64> = if n == 1 || lo == hi {
        vec![lo]
    } else {
        (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Other(e.to_string());
    w.write_record(["xi", "theta", "s_tilde", "S_tilde"]).map_err(csv_err)?;
    for xi in xs {
        let (theta, m) = ctx.theta_with_levels(xi)?;
        w.write_record([fmt_value(xi), fmt_value(theta.to_float()), fmt_value(m.s_tilde), fmt_value(m.big_s_tilde)])
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::Other(e.to_string()))?;
    emit(a.io.output.as_deref(), text.trim_end())?;
    Ok(EXIT_OK)
}

pub fn compare(a: &CompareArgs, command: &Command) -> Result<u8, CliError> {
    let (doc, inst) = load_problem(&a.io.input)?;
    let ctx = context(inst.clone(), a.numerics.tol)?;
    let base = match &a.policy {
        Some(p) => parse_policy(p)?,
        None => optimal_policy(&ctx)?,
    };
    if a.m_list.is_empty() {
        return Err(CliError::Validation("--m-list must not be empty".into()));
    }
    for &m in &a.m_list {
        PolicySpec::bounded(base.clone(), m).validate()?;
    }
    let cfg = path_config(&a.sim, a.numerics.seed)?;
    let rows = comparison_experiment(&base, &a.m_list, &cfg, &inst)?;
    let ok = rows.iter().all(|r| r.holds && r.coupling_ok());
    emit_json(
        a.io.output.as_deref(),
        &json!({ "config": command, "path": cfg, "problem": doc, "policy": base, "rows": rows, "all_hold": ok }),
    )?;
    Ok(if ok { EXIT_OK } else { EXIT_CONTRADICTION })
}
