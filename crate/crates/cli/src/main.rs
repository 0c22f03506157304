//! `risim`: outage experiments for RIS-assisted grant-free uplinks.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Overrides;

#[derive(Parser)]
#[command(name = "risim", version, about = "Monte Carlo outage experiments for RIS-assisted uplinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Overrides the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Caps the number of worker threads (results do not depend on this).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Draws fresh channel realizations per SNR point instead of reusing the
    /// same ones (disables common random numbers).
    #[arg(long, global = true)]
    independent_streams: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Estimates outage across the configured SNR list for every variant.
    Sweep {
        /// Experiment description (TOML).
        #[arg(long)]
        config: PathBuf,
        /// CSV output path; a .manifest.json is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Ranks all phase configurations at a single SNR point.
    PhaseTable {
        /// Experiment description (TOML) with phase_mode = "enumerate".
        #[arg(long)]
        config: PathBuf,
        /// CSV output path; a .manifest.json is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs built-in checks against analytic references.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .ok();
    }
    let overrides = Overrides {
        seed: cli.seed,
        independent_streams: cli.independent_streams,
    };
    let outcome = match cli.command {
        Command::Sweep { config, out } => {
            run::run_sweep(&config, &out, overrides).map(report_summary)
        }
        Command::PhaseTable { config, out } => {
            run::run_phase_table(&config, &out, overrides).map(report_summary)
        }
        Command::Validate => run::run_validate(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn report_summary(summary: run::RunSummary) {
    println!("csv {}", summary.csv_path.display());
    println!("manifest {}", summary.manifest_path.display());
    println!("rows {}", summary.rows);
}
