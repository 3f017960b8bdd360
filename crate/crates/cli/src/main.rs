//! `hypersde`: solve systems of Ito SDEs in closed form over commutative
//! hypercomplex algebras and validate the closed forms pathwise against
//! Euler-Maruyama on shared Brownian increments.
//!
//! Every subcommand reads one JSON config, writes its artifacts under the
//! output directory and prints a single machine-readable JSON summary line.
//! Exit codes: 0 success, 1 configuration error, 2 math-domain error
//! (singular element, no convergence), 3 validation failure (e.g. closed
//! form vs Euler-Maruyama beyond tolerance).

mod config;
mod svg;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::RunConfig;
use tasks::TaskIo;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Math(String),
    Validation(String),
}

impl CliError {
    pub fn config(msg: String) -> Self {
        CliError::Config(msg)
    }

    pub fn math(msg: String) -> Self {
        CliError::Math(msg)
    }

    pub fn validation(msg: String) -> Self {
        CliError::Validation(msg)
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Math(_) => "math",
            CliError::Validation(_) => "validation",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Math(m) | CliError::Validation(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Math(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hypersde",
    version,
    about = "Closed-form SDE solving by hypercomplexification, with pathwise validation"
)]
struct Cli {
    #[command(subcommand)]
    task: Task,
}

#[derive(Args)]
struct Common {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: config `output.dir`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the grid seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Rayon worker count (0 = library default). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Task {
    /// Check the algebra axioms and report residuals.
    VerifyAlgebra(Common),
    /// Expand the configured base equation into a component system.
    Expand(Common),
    /// Evaluate the linear closed form on sampled Wiener paths.
    SolveLinear(Common),
    /// Evaluate the Lotka-Volterra closed form on sampled Wiener paths.
    SolveLv(Common),
    /// Euler-Maruyama on the expanded system.
    Simulate(Common),
    /// Closed form vs Euler-Maruyama (and planar projection) on shared paths.
    Compare(Common),
    /// Strong-convergence study over dyadic grid levels.
    Convergence(Common),
    /// Gard reducibility check of a scalar SDE.
    CheckReducible(Common),
    /// Hypercomplexifiability + reducibility check of a planar system.
    CheckCp(Common),
}

impl Task {
    fn name(&self) -> &'static str {
        match self {
            Task::VerifyAlgebra(_) => "verify-algebra",
            Task::Expand(_) => "expand",
            Task::SolveLinear(_) => "solve-linear",
            Task::SolveLv(_) => "solve-lv",
            Task::Simulate(_) => "simulate",
            Task::Compare(_) => "compare",
            Task::Convergence(_) => "convergence",
            Task::CheckReducible(_) => "check-reducible",
            Task::CheckCp(_) => "check-cp",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Task::VerifyAlgebra(c)
            | Task::Expand(c)
            | Task::SolveLinear(c)
            | Task::SolveLv(c)
            | Task::Simulate(c)
            | Task::Compare(c)
            | Task::Convergence(c)
            | Task::CheckReducible(c)
            | Task::CheckCp(c) => c,
        }
    }
}

fn run(cli: &Cli) -> Result<serde_json::Value, CliError> {
    let common = cli.task.common();
    let (config, config_dir) = RunConfig::load(&common.config)?;
    if let Some(declared) = &config.task {
        if declared != cli.task.name() {
            return Err(CliError::config(format!(
                "config declares task `{declared}` but `{}` was invoked",
                cli.task.name()
            )));
        }
    }
    let workers = common.workers.or(config.workers).unwrap_or(0);
    if workers > 0 {
        // Ignore the error from a second initialization in-process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
    let out_dir = common
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let io = TaskIo {
        config: &config,
        config_dir: &config_dir,
        out_dir,
        seed_override: common.seed,
    };
    match cli.task {
        Task::VerifyAlgebra(_) => tasks::verify_algebra(&io),
        Task::Expand(_) => tasks::expand(&io),
        Task::SolveLinear(_) => tasks::solve_linear(&io),
        Task::SolveLv(_) => tasks::solve_lv(&io),
        Task::Simulate(_) => tasks::simulate(&io),
        Task::Compare(_) => tasks::compare(&io),
        Task::Convergence(_) => tasks::convergence(&io),
        Task::CheckReducible(_) => tasks::check_reducible(&io),
        Task::CheckCp(_) => tasks::check_cp(&io),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{}", summary);
            ExitCode::SUCCESS
        }
        Err(err) => {
            let summary = json!({
                "task": cli.task.name(),
                "status": "error",
                "kind": err.kind(),
                "message": err.message(),
            });
            println!("{}", summary);
            ExitCode::from(err.exit_code())
        }
    }
}
