//! Command-line surface for the string–oscillator simulator: load a JSON
//! scenario, run one of the pipeline commands, and write plot-ready CSV and
//! JSON artifacts.
//!
//! Exit codes: 0 success; 1 a `verify` check failed; 2 invalid
//! configuration (including forces with no trapping region); 3 integration
//! blow-up or dissipativity failure; 4 no convergence within the iteration
//! budget.

mod cmd;
mod config;
mod out;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lamb_core::{Error, Result};

use crate::config::ScenarioConfig;

#[derive(Parser)]
#[command(
    name = "lamb",
    version,
    about = "Simulate an infinite string driven through a nonlinear oscillator at one point: \
             reduce to the junction equation, find periodic responses via the return map, and \
             reconstruct the space-time field."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the junction dynamics; write the trajectory, field frames,
    /// and a residual summary.
    Simulate(CommonArgs),
    /// Iterate the once-per-period return map and locate its fixed points.
    Poincare(CommonArgs),
    /// Sample the invariant set of the second-order return map (needs m > 0).
    Attractor(CommonArgs),
    /// Compare the evolving field of an incoming-wave scenario against its
    /// periodic limit.
    LimitAmplitude(CommonArgs),
    /// Run the structural invariant suite; exit 0 only if every check passes.
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (default: the config's out_dir, then "out").
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Integrator step bound override.
    #[arg(long, value_name = "STEP")]
    h: Option<f64>,
    /// Frame half-width override.
    #[arg(long = "R", value_name = "R")]
    r: Option<f64>,
    /// Return-map iteration budget override.
    #[arg(long, value_name = "N")]
    n_iter: Option<usize>,
    /// Grid override: field cells, or the seed-grid dimension for
    /// `attractor`.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Attractor burn-in override.
    #[arg(long, value_name = "N")]
    burn_in: Option<usize>,
    /// Fixed-point tolerance override.
    #[arg(long, value_name = "TOL")]
    tol: Option<f64>,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Poincare(a)
            | Command::Attractor(a)
            | Command::LimitAmplitude(a)
            | Command::Verify(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Cap the worker pool when LAMB_THREADS is set.
fn init_thread_pool() {
    if let Some(n) = std::env::var("LAMB_THREADS")
        .ok()
        .and_then(|raw| raw.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invalid(_)
        | Error::Syntax { .. }
        | Error::Coercivity(_)
        | Error::GridMismatch(_)
        | Error::OutOfSpan { .. } => 2,
        Error::Eval { .. } | Error::Integration { .. } | Error::Dissipativity(_) => 3,
        Error::NoConvergence(_) => 4,
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let args = cli.command.args();
    let mut cfg = ScenarioConfig::load(&args.config)?;
    apply_overrides(&mut cfg, args, matches!(cli.command, Command::Attractor(_)));
    cfg.validate()?;

    let built = config::build(&cfg)?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out_dir)
        .map_err(|e| Error::invalid(format!("cannot create {}: {e}", out_dir.display())))?;

    match &cli.command {
        Command::Simulate(_) => cmd::simulate(&cfg, &built, &out_dir),
        Command::Poincare(_) => cmd::poincare(&cfg, &built, &out_dir),
        Command::Attractor(_) => cmd::attractor(&cfg, &built, &out_dir),
        Command::LimitAmplitude(_) => cmd::limit_amplitude(&cfg, &built, &out_dir),
        Command::Verify(_) => cmd::run_verify(&cfg, &built, &out_dir),
    }
}

/// Flags override the corresponding numeric settings; `--grid` targets the
/// seed grid for `attractor` and the field grid everywhere else.
fn apply_overrides(cfg: &mut ScenarioConfig, args: &CommonArgs, is_attractor: bool) {
    if let Some(h) = args.h {
        cfg.numerics.h = Some(h);
    }
    if let Some(r) = args.r {
        cfg.numerics.r = r;
    }
    if let Some(n) = args.n_iter {
        cfg.numerics.n_iter = n;
    }
    if let Some(g) = args.grid {
        if is_attractor {
            cfg.numerics.seed_grid = g;
        } else {
            cfg.numerics.grid = g;
        }
    }
    if let Some(b) = args.burn_in {
        cfg.numerics.burn_in = b;
    }
    if let Some(tol) = args.tol {
        cfg.numerics.tol_fp = tol;
    }
}
