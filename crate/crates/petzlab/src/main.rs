//! Campaign runner CLI.
//!
//! Exit codes: 0 all checks passed, 1 a violation was found,
//! 2 usage or configuration error.

use clap::{Args, Parser, Subcommand};
use petzlab::harness::{format_summary, run_campaign, CampaignConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "petzlab",
    version,
    about = "Randomized verification campaigns for recovery channels, weighted Lp norms, and trace inequalities on matrix algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign of randomized inequality checks
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file mirroring the campaign keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Suites to run (comma separated); defaults to every passing suite
    #[arg(long, value_delimiter = ',')]
    suite: Option<Vec<String>>,
    /// Matrix dimensions (comma separated, each in 2..=8)
    #[arg(long, value_delimiter = ',')]
    dim: Option<Vec<usize>>,
    /// Trials per suite and dimension
    #[arg(long)]
    trials: Option<u64>,
    /// Campaign seed; per-trial streams derive from it deterministically
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override applied to every selected suite
    #[arg(long)]
    tol: Option<f64>,
    /// CSV output path (a .plot.py sibling script is emitted next to it)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads
    #[arg(long)]
    workers: Option<usize>,
}

fn build_config(args: &RunArgs) -> Result<CampaignConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            toml::from_str::<CampaignConfig>(&text)
                .map_err(|e| format!("config parse error in {}: {e}", path.display()))?
        }
        None => CampaignConfig::default(),
    };
    if let Some(suites) = &args.suite {
        cfg.suites = suites.clone();
    }
    if let Some(dims) = &args.dim {
        cfg.dims = dims.clone();
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = args.tol {
        for suite in cfg.suites.clone() {
            cfg.tolerances.insert(suite, tol);
        }
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let cfg = match build_config(&args) {
                Ok(cfg) => cfg,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(2);
                }
            };
            match run_campaign(&cfg) {
                Ok(summary) => {
                    print!("{}", format_summary(&summary));
                    if let Some(path) = &cfg.out {
                        println!("csv: {}", path.display());
                    }
                    if summary.all_pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
