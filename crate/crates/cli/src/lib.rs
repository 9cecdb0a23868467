//! Command-line front end: JSON system specs in, CSV and JSON results out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod extras;
mod output;
pub mod spec;

pub use commands::EXAMPLE_SPEC;
pub use extras::Extras;
pub use spec::{parse_system_spec, Spec};

use std::collections::BTreeMap;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid spec: {0}")]
    Schema(String),
    #[error("invalid arguments: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("query outside the region: {0}")]
    Outside(String),
    #[error(transparent)]
    Core(#[from] secrecy_core::Error),
}

impl CliError {
    /// 1 for infeasible region queries, 2 for every other failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Outside(_) => 1,
            CliError::Core(e) if e.is_infeasible() => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "kebab-case")]
pub enum Command {
    Capacity,
    Rd,
    Crd,
    Gamma1,
    Gamma2,
    Region,
    Sweep,
    Simulate,
    VerifyExample,
    Tilted,
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub command: Command,
    /// Optional only for `verify-example`, which falls back to the built-in example system.
    pub spec_path: Option<PathBuf>,
    /// CSV goes here; the JSON report goes next to it with a `.json` extension.
    pub out_path: PathBuf,
    pub seed: u64,
    pub tol: f64,
    pub trials: usize,
    /// 0 means one worker per hardware thread.
    pub threads: usize,
    pub extra: BTreeMap<String, String>,
}

impl JobConfig {
    pub fn new(command: Command, spec_path: Option<PathBuf>, out_path: PathBuf) -> Self {
        JobConfig {
            command,
            spec_path,
            out_path,
            seed: 0,
            tol: 1e-6,
            trials: 10_000,
            threads: 0,
            extra: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.extra.insert(key.to_string(), value.to_string());
        self
    }
}

fn load_spec(job: &JobConfig) -> Result<Option<Spec>, CliError> {
    let Some(path) = &job.spec_path else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_system_spec(&text).map(Some)
}

/// Runs one job and writes its outputs. Errors carry the exit code.
pub fn execute(job: &JobConfig) -> Result<(), CliError> {
    if !(job.tol > 0.0) || job.trials == 0 {
        return Err(CliError::Config(format!(
            "need tol > 0 and trials ≥ 1 (got {}, {})",
            job.tol, job.trials
        )));
    }
    let spec = load_spec(job)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let (out, verdict) = pool.install(|| commands::dispatch(job, spec))?;
    out.write(&job.out_path)?;
    verdict
}

/// [`execute`] with errors reported on standard error; returns the process exit code.
pub fn run(job: &JobConfig) -> i32 {
    match execute(job) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
