//! `iht`: generate, solve, verify and benchmark l0-regularized box- and
//! cone-constrained problems.
//!
//! Exit codes: 0 converged (and, for cone solvers, certificate holds),
//! 1 input error, 2 iteration-capped or failed certificate, 3 verify
//! mismatch.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::commands::{bench_cmd, gen_cmd, out_dir, solve_cmd, verify_cmd, EXIT_INPUT_ERROR};
use crate::config::ConfigBag;

#[derive(Parser)]
#[command(name = "iht", version, about = "Iterative hard thresholding solvers for l0-regularized convex programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON file holding flat namespaced keys ("iht.l_factor", "gen.n", ...).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a single config key, e.g. --set iht.l_factor=1.5.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory (default: $IHT_OUT_DIR or the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem JSON file.
    #[arg(long)]
    problem: PathBuf,
    /// Solver: iht | iht-variant | pg | penalty-fixed | penalty-dynamic.
    #[arg(long)]
    solver: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance (problem.json + instance.json sidecar).
    Gen(CommonArgs),
    /// Solve a problem file and write report.json + trace.csv.
    Solve(ProblemArgs),
    /// Solve, then check the result against the enumeration oracle.
    Verify(ProblemArgs),
    /// Run a (seed x lambda x L-factor x solver) grid and write bench.csv.
    Bench(CommonArgs),
}

fn build_bag(common: &CommonArgs) -> anyhow::Result<ConfigBag> {
    ConfigBag::load(common.config.as_deref(), &common.sets)
}

fn run() -> anyhow::Result<u8> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init()
        .ok();
    let cli = Cli::parse();
    match cli.command {
        Command::Gen(common) => {
            let out = out_dir(common.out.as_deref());
            let mut bag = build_bag(&common)?;
            gen_cmd(&mut bag, &out)
        }
        Command::Solve(args) => {
            let out = out_dir(args.common.out.as_deref());
            let mut bag = build_bag(&args.common)?;
            if let Some(solver) = &args.solver {
                bag.override_key("solver", Value::String(solver.clone()));
            }
            bag.override_key(
                "problem",
                Value::String(args.problem.display().to_string()),
            );
            let _ = bag.string("problem", "")?;
            solve_cmd(&mut bag, &args.problem, &out)
        }
        Command::Verify(args) => {
            let out = out_dir(args.common.out.as_deref());
            let mut bag = build_bag(&args.common)?;
            if let Some(solver) = &args.solver {
                bag.override_key("solver", Value::String(solver.clone()));
            }
            bag.override_key(
                "problem",
                Value::String(args.problem.display().to_string()),
            );
            let _ = bag.string("problem", "")?;
            verify_cmd(&mut bag, &args.problem, &out)
        }
        Command::Bench(common) => {
            let out = out_dir(common.out.as_deref());
            let mut bag = build_bag(&common)?;
            bench_cmd(&mut bag, &out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_INPUT_ERROR)
        }
    }
}
