//! `schroflow` command-line runs: JSON config in, CSV/JSON artifacts out.
//!
//! Exit codes: 0 ok, 2 config, 3 Hardy condition violated, 4 expectation
//! missed, 5 numeric failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

pub mod commands;
pub mod config;
pub mod expect;
pub mod output;

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "SCHROFLOW_THREADS";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("Hardy condition violated: {0}")]
    Hardy(String),
    #[error("expectation missed: {0}")]
    Expectation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Hardy(_) => 3,
            CliError::Expectation(_) => 4,
            CliError::Numeric(_) => 5,
        }
    }
}

impl From<schroflow::Error> for CliError {
    fn from(e: schroflow::Error) -> Self {
        match e {
            schroflow::Error::Numeric { .. } | schroflow::Error::Accuracy(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Spectrum,
    Evolve,
    Decay,
    Kernel,
    Heat,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
            Command::Decay => "decay",
            Command::Kernel => "kernel",
            Command::Heat => "heat",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "schroflow",
    version,
    about = "Spectra, evolutions and decay fits for inverse-square Schrödinger flows"
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file of expected summary values.
    #[arg(long)]
    pub expect: Option<PathBuf>,
    /// Worker threads (falls back to SCHROFLOW_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
}

fn threads(arg: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = arg {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{THREADS_ENV}={s:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Runs one command; returns the process exit code.
pub fn run(args: &Args) -> i32 {
    match execute(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("schroflow: {e}");
            e.exit_code()
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let cfg = config::parse(&read(&args.config)?)?;
    let expectations = match &args.expect {
        Some(p) => Some(expect::parse(&read(p)?)?),
        None => None,
    };
    let out_dir = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads(args.threads)? {
        if n == 0 {
            return Err(CliError::Config("thread count must be >= 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;

    let start = std::time::Instant::now();
    let arts = pool.install(|| commands::dispatch(args.command, &cfg))?;
    arts.write(&out_dir)?;
    eprintln!("{}: {:.3}s", args.command.name(), start.elapsed().as_secs_f64());
    for line in &arts.messages {
        println!("{line}");
    }
    arts.status.clone()?;
    if let Some(ex) = expectations {
        expect::check(&ex, &arts.summary)?;
    }
    Ok(())
}
