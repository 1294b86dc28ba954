use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use structured_bai::harness::{self, ExperimentConfig, RunSummary};

/// Best-arm identification in games with noisy leaf evaluations.
#[derive(Parser)]
#[command(name = "sbai", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One run with a per-round trace. Exits with status 2 if undecided.
    Run(Flags),
    /// Seeded replications scored against the true best arm.
    Verify(Flags),
    /// Lower bound, hardness and round bounds of an instance.
    Bounds(Flags),
    /// `verify` over a list of risk levels.
    Sweep {
        #[command(flatten)]
        flags: Flags,
        /// Comma-separated risk levels.
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
    },
}

#[derive(Args)]
struct Flags {
    /// Key-value config file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instance file (JSON).
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Round budget per run.
    #[arg(long)]
    cap: Option<u64>,
    /// Interior threshold grid points for the lower bound.
    #[arg(long)]
    theta_grid: Option<usize>,
    /// Output directory for CSV and JSON files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

impl Flags {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.instance {
            cfg.instance = Some(v.clone());
        }
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        if let Some(v) = self.reps {
            cfg.reps = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.cap {
            cfg.cap = v;
        }
        if let Some(v) = self.theta_grid {
            cfg.theta_grid = v;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.workers {
            cfg.workers = Some(v);
        }
        Ok(cfg)
    }
}

fn print(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(flags) => {
            let cfg = flags.config()?;
            let instance = cfg.load_instance()?;
            let result = harness::cmd_run(&instance, &cfg)?;
            print(&json!({ "command": "run", "result": RunSummary::from(&result) }))?;
            Ok(if result.is_decided() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Verify(flags) => {
            let cfg = flags.config()?;
            let report = harness::cmd_verify(&cfg.load_instance()?, &cfg)?;
            print(&json!({ "command": "verify", "report": report }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds(flags) => {
            let cfg = flags.config()?;
            let report = harness::cmd_bounds(&cfg.load_instance()?, &cfg)?;
            print(&json!({ "command": "bounds", "report": report }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { flags, deltas } => {
            let mut cfg = flags.config()?;
            if let Some(d) = deltas {
                cfg.deltas = d;
            }
            let rows = harness::cmd_sweep(&cfg.load_instance()?, &cfg)?;
            print(&json!({ "command": "sweep", "rows": rows }))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
