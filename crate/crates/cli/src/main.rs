//! `ssopt`: solve, simulate, sweep, verify and compare from JSON problem files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "ssopt", version, about = "Optimal (s,S) policies under Brownian demand")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
enum Command {
    /// Compute the optimal policy and certify it.
    Solve(SolveArgs),
    /// Estimate the average cost of a policy by simulation.
    Simulate(SimulateArgs),
    /// Tabulate the cost of fixed order sizes as CSV.
    Sweep(SweepArgs),
    /// Re-run the certificate on a result file written by `solve`.
    Verify(VerifyArgs),
    /// Simulate a policy against its bounded modifications.
    Compare(CompareArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct Io {
    /// Problem (or, for `verify`, result) file.
    #[arg(long)]
    input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Numerics {
    /// Quadrature and root-finding tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for the certificate's random pairs and for simulation.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum MethodArg {
    Auto,
    Step,
    Grid,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SolveArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    numerics: Numerics,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Also run the grid search and report the gap.
    #[arg(long)]
    cross_check: bool,
    /// Skip the optimality certificate.
    #[arg(long)]
    no_certificate: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SimulationArgs {
    #[arg(long, default_value_t = 1e4)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 8)]
    reps: u64,
    /// Fraction of the horizon discarded before costs are counted.
    #[arg(long, default_value_t = 0.1)]
    burn_in: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    numerics: Numerics,
    #[command(flatten)]
    sim: SimulationArgs,
    /// `s=<v>,S=<v>` or `s=<v>` for base stock; the optimal policy when omitted.
    #[arg(long)]
    policy: Option<String>,
    /// Simulate the bounded modification with this bound instead.
    #[arg(long)]
    m: Option<f64>,
    /// Relative gap to the analytic cost above which the run counts as a contradiction.
    #[arg(long, default_value_t = 0.02)]
    sim_tol: f64,
    /// Write the first replication's path as CSV.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Steps between trajectory rows.
    #[arg(long, default_value_t = 100)]
    stride: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    xi_min: f64,
    #[arg(long)]
    xi_max: f64,
    #[arg(long, default_value_t = 100)]
    xi_steps: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    numerics: Numerics,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CompareArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    numerics: Numerics,
    #[command(flatten)]
    sim: SimulationArgs,
    /// Base policy, `s=<v>,S=<v>` or `s=<v>`; the optimal policy when omitted.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    m_list: Vec<f64>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SSOPT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("SSOPT_THREADS must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(CliError::Validation("SSOPT_THREADS must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<u8, CliError> {
        init_threads()?;
        match &cli.command {
            Command::Solve(a) => commands::solve(a, &cli.command),
            Command::Simulate(a) => commands::simulate(a, &cli.command),
            Command::Sweep(a) => commands::sweep(a),
            Command::Verify(a) => commands::verify(a, &cli.command),
            Command::Compare(a) => commands::compare(a, &cli.command),
        }
    };
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
