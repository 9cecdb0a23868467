use clap::Parser;
use secrecy_cli::{run, Command, JobConfig};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Secrecy regions of the Shannon cipher system: solvers, region bounds and simulations.
///
/// Results go to --out (CSV) and a sibling .json file. Exit codes: 0 success,
/// 1 infeasible region query, 2 solver fault or configuration error.
#[derive(Debug, Parser)]
#[command(name = "secrecy", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON system spec.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Worker threads; 0 uses every hardware thread.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Command setting `key=value`, repeatable.
    #[arg(long = "set", value_parser = parse_pair)]
    set: Vec<(String, String)>,
}

fn parse_pair(raw: &str) -> Result<(String, String), String> {
    raw.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.to_string()))
        .ok_or_else(|| format!("expected key=value, got {raw:?}"))
}

fn main() {
    let args = Args::parse();
    let extra: BTreeMap<String, String> = args.set.into_iter().collect();
    let job = JobConfig {
        command: args.command,
        spec_path: args.config,
        out_path: args.out,
        seed: args.seed,
        tol: args.tol,
        trials: args.trials,
        threads: args.threads,
        extra,
    };
    std::process::exit(run(&job));
}
