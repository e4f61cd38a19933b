//! `jmtool`: joint-measurability checks, threshold tables and parameter scans.
//!
//! Thread count follows `RAYON_NUM_THREADS`.

mod commands;
mod evaluate;
mod failure;
mod output;
mod scan;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jm_core::optimizer::OptimizerConfig;

use crate::evaluate::Method;
use crate::failure::{Failure, Outcome};
use crate::output::Run;

#[derive(Debug, Parser)]
#[command(name = "jmtool", version, about = "Joint measurability of POVM pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Optimizer settings as JSON; the flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Largest minimized negativity still reported as jointly measurable.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Output file; a `.manifest.json` sidecar is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that each file holds a valid POVM.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Decide joint measurability of two POVMs.
    Check {
        povm_a: PathBuf,
        povm_b: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Threshold sharpness and entropy of equilateral trichotomic pairs.
    Table1 {
        /// Grid points over one period `[0, 2π/3]`.
        #[arg(long, default_value_t = 121)]
        resolution: usize,
    },
    /// Verdicts over a grid of a POVM family, as CSV.
    Scan(scan::ScanArgs),
    /// Sequential-measurement quasiprobability and verdict.
    Ssm(commands::SsmArgs),
}

fn config(cli: &Cli) -> Outcome<OptimizerConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        }
        None => OptimizerConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(restarts) = cli.restarts {
        cfg.restarts = restarts;
    }
    if let Some(tol) = cli.tolerance {
        cfg.jm_tolerance = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Outcome<()> {
    let run = Run::new(cli.out.clone(), config(&cli)?);
    match &cli.command {
        Command::Validate { files } => commands::validate(files, run),
        Command::Check { povm_a, povm_b, method } => commands::check(povm_a, povm_b, *method, run),
        Command::Table1 { resolution } => commands::table1(*resolution, run),
        Command::Scan(args) => scan::run(args, run),
        Command::Ssm(args) => commands::ssm(args, run),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jmtool: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
