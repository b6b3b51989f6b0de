//! `slope-lab`: command-line front end for slope-core.
//!
//! Exit codes: 0 on success, 1 on domain errors (bad input data, failed
//! assertions, solver failures), 2 on usage errors.

mod commands;
mod pretty;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "slope-lab", version, about = "Sorted-L1 penalized regression experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOptions,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOptions {
    /// Seed for every random draw (experiments default to the spec's base_seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, env = "SLOPE_LAB_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Warn)]
    pub log_level: LogLevel,
    /// Base directory for relative output paths.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
}

impl GlobalOptions {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn resolve(&self, path: &std::path::Path) -> PathBuf {
        match &self.output_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
    Trace,
}

impl From<LogLevel> for log::LevelFilter {
    fn from(l: LogLevel) -> Self {
        match l {
            LogLevel::Error => Self::Error,
            LogLevel::Warn => Self::Warn,
            LogLevel::Info => Self::Info,
            LogLevel::Debug => Self::Debug,
            LogLevel::Trace => Self::Trace,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the sorted-L1 prox of a vector.
    Prox(commands::ProxArgs),
    /// Fit an estimator to a design matrix and response.
    Fit(commands::FitArgs),
    /// Solve the state-evolution equations.
    Se(commands::SeArgs),
    /// Phase-transition threshold and noise sensitivity over weight families.
    Phase(commands::PhaseArgs),
    /// Generate designs, signals, noise or weights.
    Gen(commands::GenArgs),
    /// Run experiment specs.
    Experiment {
        #[command(subcommand)]
        action: commands::ExperimentAction,
    },
}

/// A failure that maps to exit code 1.
#[derive(Debug)]
pub struct DomainError(pub String);

impl<E: std::fmt::Display> From<E> for DomainError {
    fn from(e: E) -> Self {
        Self(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    env_logger::Builder::new()
        .filter_level(cli.global.log_level.into())
        .format_timestamp(None)
        .init();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} worker threads: {e}", cli.global.threads);
            return ExitCode::from(1);
        }
    };
    match pool.install(|| commands::dispatch(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(DomainError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
