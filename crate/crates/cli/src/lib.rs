//! Driver for the vector-soliton experiments.
//!
//! A run reads a TOML config, executes one experiment kind and writes
//! `results.json`, `config.toml` (the resolved config), `log.txt` and
//! `data/*` into the output directory. Exit codes: 0 success, 2 invalid
//! input, 3 numerical diagnostic failure, 1 I/O trouble.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use config::{ExperimentConfig, Kind};
use output::{Artifacts, OutputDir};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Diagnostic(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Diagnostic(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<solitonq_core::Error> for CliError {
    fn from(e: solitonq_core::Error) -> Self {
        if e.is_diagnostic() {
            CliError::Diagnostic(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

pub const DEFAULT_OUT: &str = "solitonq-out";

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub kind: Kind,
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Loads, runs and persists one experiment; returns the output directory.
pub fn run(opts: &RunOptions) -> Result<PathBuf, CliError> {
    let config = ExperimentConfig::load(&opts.config)?.resolve(opts.kind, opts.seed)?;
    let out = opts
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let dir = OutputDir::acquire(&out)?;
    let start = Instant::now();
    let mut art = execute(&config)?;
    art.log(format!("elapsed_s = {:.3}", start.elapsed().as_secs_f64()));
    dir.commit(&art, &config.to_toml())?;
    Ok(out)
}

/// Runs an already resolved config in memory.
pub fn execute(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let kind = config
        .kind
        .ok_or_else(|| CliError::Validation("config has no kind; call resolve first".into()))?;
    let seed = config.seed.unwrap_or(config.mcmc.seed);
    let mut art = Artifacts::new(kind.name(), seed);
    art.log(format!("solitonq {kind}"));
    art.log(format!("seed = {seed}"));
    art.log(format!(
        "params: b = {}, c = {}, B = {}, n = {}, m = {}",
        config.params.b, config.params.c, config.params.xpm, config.params.n, config.params.m
    ));
    match kind {
        Kind::BetheEval => experiments::bethe_eval(config, &mut art)?,
        Kind::Eigencheck => experiments::eigencheck(config, &mut art)?,
        Kind::Sample => experiments::sample(config, &mut art)?,
        Kind::QTable => experiments::q_table(config, &mut art)?,
        Kind::Protocol => experiments::protocol(config, &mut art)?,
        Kind::Epr => experiments::epr(config, &mut art)?,
        Kind::Classical => experiments::classical(config, &mut art)?,
        Kind::FullPipeline => experiments::full_pipeline(config, &mut art)?,
    }
    Ok(art)
}
