//! `hjdirac` command-line driver.
//!
//! Exit codes: 0 success, 1 verification or integration failure, 2 usage or
//! configuration error.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "hjdirac", version, about = "Metric/Dirac duality verification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// JSON run configuration (must carry schema_version).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Tolerance override for a named check; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = config::parse_tol)]
    tol: Vec<(String, f64)>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification suite; exit 0 iff every check passes.
    Verify {
        /// clifford, geometry, hj, dirac, dynamics, statmech or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Overrides verify.step.
        #[arg(long)]
        step: Option<f64>,
        /// Overrides verify.samples.
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate a trajectory and write it with a diagnostics sidecar.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Sample a Maxwell–Boltzmann ensemble, optionally enumerating occupancies.
    Ensemble {
        #[command(flatten)]
        common: Common,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("HJDIRAC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("HJDIRAC_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn effective_config(common: &Common) -> Result<config::RunConfig, CliError> {
    let mut cfg = config::load(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    for (name, v) in &common.tol {
        cfg.tolerances.insert(name.clone(), *v);
    }
    Ok(cfg)
}

fn require_out(common: &Common) -> Result<PathBuf, CliError> {
    common.out.clone().ok_or_else(|| CliError::Usage("--out DIR is required".into()))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Verify { suite, step, samples, common } => {
            let mut cfg = effective_config(&common)?;
            if let Some(s) = step {
                cfg.verify.step = s;
            }
            if let Some(n) = samples {
                cfg.verify.samples = n;
            }
            commands::verify(&cfg, &suite, common.out.as_deref(), common.format.unwrap_or(Format::Json))
        }
        Command::Simulate { common } => {
            let cfg = effective_config(&common)?;
            let out = require_out(&common)?;
            commands::simulate(&cfg, &out, common.format.unwrap_or(Format::Csv)).map(|_| true)
        }
        Command::Ensemble { common } => {
            let cfg = effective_config(&common)?;
            let out = require_out(&common)?;
            commands::ensemble(&cfg, &out, common.format.unwrap_or(Format::Csv))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(1)
        }
    }
}
