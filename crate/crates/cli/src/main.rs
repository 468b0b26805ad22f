//! Command-line experiment runner: one subcommand per experiment, plus
//! `validate` (config check only) and `show` (pretty-print a persisted
//! table). Exit codes: 0 success, 1 configuration error, 2 experiment
//! failure.

mod config;
mod manifest;
mod runner;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use config::{Experiment, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "liftq", version, about = "Mean-field control learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Config file (key=value lines, # comments)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed; per-repeat streams are derived from it
    #[arg(long)]
    seed: Option<u64>,
    /// Number of independent repeats
    #[arg(long)]
    repeats: Option<usize>,
    /// Output directory (also settable via LIFTQ_OUT)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel repeats
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Start-dependence of per-(state,action) learning on the two-state benchmark
    NaiveInconsistency(CommonArgs),
    /// Sweep learning of the lifted table on the two-state benchmark
    IqTwostate(CommonArgs),
    /// Value iteration to the lifted fixed point on the two-state benchmark
    ValueIteration(CommonArgs),
    /// Cooperative supply-game learning on (price, supply-mix) cells
    SupplyMkv(CommonArgs),
    /// Competitive softmax baseline for the supply game
    SupplyMfg(CommonArgs),
    /// Cooperative vs competitive cumulative-reward simulation
    HeadToHead(CommonArgs),
    /// Fixed-point residual of the lifted table built from per-(state,action) values
    IdentityCheck(CommonArgs),
    /// Parse and range-check a config file without running anything
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Pretty-print a persisted table file
    Show { table: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let _ = e.print();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };

    let (experiment, common) = match &cli.command {
        Command::NaiveInconsistency(c) => (Experiment::NaiveInconsistency, c.clone()),
        Command::IqTwostate(c) => (Experiment::IqTwoState, c.clone()),
        Command::ValueIteration(c) => (Experiment::ValueIteration, c.clone()),
        Command::SupplyMkv(c) => (Experiment::SupplyMkv, c.clone()),
        Command::SupplyMfg(c) => (Experiment::SupplyMfg, c.clone()),
        Command::HeadToHead(c) => (Experiment::HeadToHead, c.clone()),
        Command::IdentityCheck(c) => (Experiment::IdentityCheck, c.clone()),
        Command::Validate { config } => {
            return match ExperimentConfig::load(config, None) {
                Ok(cfg) => {
                    println!("ok: {} ({} repeats, seed {})", cfg.experiment, cfg.repeats, cfg.seed);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("config error: {e:#}");
                    ExitCode::from(1)
                }
            };
        }
        Command::Show { table } => {
            return match show_table(table) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            };
        }
    };

    let cfg = match build_config(experiment, &common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(1);
        }
    };

    match runner::run(&cfg) {
        Ok(manifest) if manifest.is_success() => {
            println!(
                "{}: {} artifact(s) in {} ({}s)",
                cfg.experiment,
                manifest.artifacts.len(),
                cfg.out_dir.display(),
                manifest.elapsed_seconds
            );
            ExitCode::SUCCESS
        }
        Ok(manifest) => {
            eprintln!(
                "experiment failed: {} (manifest at {})",
                manifest.failure.as_deref().unwrap_or("unknown"),
                manifest.path.display()
            );
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("experiment failed: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Precedence for the output directory: --out flag, then LIFTQ_OUT, then the
/// config file, then the built-in default. Other flags override the file.
fn build_config(experiment: Experiment, common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path, Some(experiment))?,
        None => ExperimentConfig::defaults(experiment),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(repeats) = common.repeats {
        cfg.repeats = repeats;
    }
    if let Some(workers) = common.workers {
        cfg.workers = workers;
    }
    if let Ok(dir) = std::env::var("LIFTQ_OUT") {
        if !dir.is_empty() {
            cfg.out_dir = PathBuf::from(dir);
        }
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Prints the header of a persisted table and, per state cell, the best
/// value with its maximizing policy composition.
fn show_table(path: &PathBuf) -> Result<()> {
    let file = std::fs::File::open(path)
        .map_err(|e| anyhow!("cannot open {}: {e}", path.display()))?;
    let (header, lines) = liftq_core::iq::read_table(std::io::BufReader::new(file))
        .map_err(|e| anyhow!("{e}"))?;
    println!(
        "table: |S|={} |A|={} state-grid 1/{} action-grid 1/{} gamma={}",
        header.num_states,
        header.num_actions,
        header.state_resolution,
        header.action_resolution,
        header.gamma
    );
    println!("cells: {}", lines.len());
    let mut i = 0;
    while i < lines.len() {
        let state = lines[i].state_composition.clone();
        let mut best = f64::NEG_INFINITY;
        let mut best_rows: &[Vec<u32>] = &[];
        let mut j = i;
        while j < lines.len() && lines[j].state_composition == state {
            if lines[j].value > best {
                best = lines[j].value;
                best_rows = &lines[j].row_compositions;
            }
            j += 1;
        }
        let rows: Vec<String> = best_rows.iter().map(|r| format!("{r:?}")).collect();
        println!("state {state:?}: best {best:.6} at {}", rows.join(" "));
        i = j;
    }
    Ok(())
}
