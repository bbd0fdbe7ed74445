//! `mechopt`: evaluate, optimize and map a remote-center-of-motion mechanism from a
//! TOML run configuration.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration parse error, 3 invariant
//! violation, 4 no feasible actuator bracket.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mechopt_core::optimizer::{build_objective, optimize_design, DesignOutcome};
use mechopt_core::workspace::{evaluate_points, singularity_map, summarize, Bracket, LengthRange};
use mechopt_core::MechError;
use serde::Serialize;
use thiserror::Error;

use config::Resolved;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid configuration: {0}")]
    Invariant(#[from] MechError),
    #[error("{0}")]
    Runtime(String),
    #[error("no actuator bracket contains the required leg lengths")]
    NoBracket,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::NoBracket => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("I/O error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(format!("serialization error: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "mechopt", version, about = "Remote-center-of-motion mechanism analysis and design synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the configured design over the required workspace.
    Evaluate(RunArgs),
    /// Optimize the design with Nelder-Mead, starting from the configured design.
    Optimize(RunArgs),
    /// Jacobian determinant over the workspace grid.
    SingularityMap(RunArgs),
    /// Feasible actuator windows for the configured design.
    BracketSearch(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the configuration.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn setup(args: &RunArgs) -> Result<Resolved, CliError> {
    let threads = match std::env::var("MECHOPT_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("MECHOPT_THREADS must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    // fails only if a pool already exists, which cannot happen this early
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();

    let mut resolved = config::load(&args.config)?.resolve()?;
    if let Some(dir) = &args.output_dir {
        resolved.output_dir = dir.clone();
    }
    std::fs::create_dir_all(&resolved.output_dir)?;
    Ok(resolved)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    report::write_atomic(&dir.join(name), &report::to_json(value)?)?;
    Ok(())
}

fn cmd_evaluate(cfg: &Resolved) -> Result<(), CliError> {
    let points = evaluate_points(&cfg.design, &cfg.workspace);
    let evaluation = summarize(&points, &cfg.actuator);
    let csv = report::workspace_map_csv(&points);
    write_json(&cfg.output_dir, "evaluation.json", &evaluation)?;
    report::write_atomic(&cfg.output_dir.join("workspace_map.csv"), csv.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct OptimizationReport<'a> {
    #[serde(flatten)]
    outcome: &'a DesignOutcome,
    seed: &'a [f64],
    seed_f: f64,
}

fn cmd_optimize(cfg: &Resolved) -> Result<(), CliError> {
    let seed_f = build_objective(&cfg.workspace, &cfg.actuator, &cfg.objective, &cfg.space)(&cfg.seed);
    if !seed_f.is_finite() {
        return Err(CliError::Invariant(MechError::Domain(
            "seed design lies outside the parameter bounds".into(),
        )));
    }
    let outcome = optimize_design(
        &cfg.seed,
        &cfg.space,
        &cfg.workspace,
        &cfg.actuator,
        &cfg.objective,
        &cfg.optimizer,
    )
    .map_err(|e| CliError::Runtime(format!("optimization failed: {e}")))?;
    let report = OptimizationReport {
        outcome: &outcome,
        seed: &cfg.seed,
        seed_f,
    };
    let csv = report::trace_csv(&outcome.result.trace);
    write_json(&cfg.output_dir, "optimization.json", &report)?;
    report::write_atomic(&cfg.output_dir.join("trace.csv"), csv.as_bytes())?;
    Ok(())
}

fn cmd_singularity_map(cfg: &Resolved) -> Result<(), CliError> {
    let map = singularity_map(&cfg.design, &cfg.workspace);
    report::write_atomic(
        &cfg.output_dir.join("singularity_map.csv"),
        report::singularity_csv(&map).as_bytes(),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct BracketReport {
    coverage: f64,
    rho_range: Option<[LengthRange; 2]>,
    min_closed_length: f64,
    stroke: f64,
    search_step: f64,
    brackets: Vec<Bracket>,
}

fn cmd_bracket_search(cfg: &Resolved) -> Result<(), CliError> {
    let evaluation = summarize(&evaluate_points(&cfg.design, &cfg.workspace), &cfg.actuator);
    let report = BracketReport {
        coverage: evaluation.coverage,
        rho_range: evaluation.rho_range,
        min_closed_length: cfg.actuator.min_closed_length,
        stroke: cfg.actuator.stroke,
        search_step: cfg.actuator.search_step,
        brackets: evaluation.feasible_brackets,
    };
    write_json(&cfg.output_dir, "brackets.json", &report)?;
    if report.brackets.is_empty() {
        return Err(CliError::NoBracket);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Evaluate(a) => cmd_evaluate(&setup(a)?),
        Command::Optimize(a) => cmd_optimize(&setup(a)?),
        Command::SingularityMap(a) => cmd_singularity_map(&setup(a)?),
        Command::BracketSearch(a) => cmd_bracket_search(&setup(a)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mechopt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
