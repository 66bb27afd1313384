use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lyap_cli::{parse_config, run, CliError, Command};

/// Lyapunov functions from the Koopman generator: hypothesis checks, Galerkin
/// solve, trajectory oracle, comparison and Laguerre decomposition.
#[derive(Debug, Parser)]
#[command(name = "lyap", version)]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `output_dir` from the config, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for sampled points (default: `seed` from the config, else 0).
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(args: &Args) -> Result<bool, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed)?;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.raw.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let report = run(args.command, &cfg, &out)?;
    print!("{report}");
    Ok(report.passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
