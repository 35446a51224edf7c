//! Configuration-driven experiment runner.
//!
//! An experiment directory holds the serial reference, per-`K` partition
//! samples, weights, aggregated draws, evaluation reports and comparison
//! tables, indexed by `manifest.json`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use experiment::{run_experiment, ExperimentResult};

#[derive(Debug, Parser)]
#[command(name = "vcmc", version, about = "Variational consensus Monte Carlo experiments")]
pub struct Cli {
    /// Experiment config (TOML, or JSON with a .json extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overwrite existing results.
    #[arg(long, global = true)]
    pub force: bool,
    /// Print the stage plan and exit without writing.
    #[arg(long, global = true)]
    pub dry_run: bool,
    /// Worker threads; 0 uses the hardware default.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the serial reference and/or the per-partition chains.
    Sample {
        #[arg(long, conflicts_with = "parallel")]
        serial: bool,
        #[arg(long)]
        parallel: bool,
    },
    /// Tune aggregation weights on stored samples.
    Optimize,
    /// Build baseline weights and aggregate stored samples.
    Aggregate,
    /// Score aggregated samples against the serial reference.
    Evaluate,
    /// Every stage end to end.
    Pipeline,
    /// Re-check a finished experiment directory.
    Validate,
}

/// Runs `f` on a pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(f())
    }
}

fn context(cli: &Cli) -> Result<commands::Context> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = ExperimentConfig::load(path)?;
    commands::Context::new(cfg, cli.seed, cli.out.clone(), cli.force, cli.dry_run)
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Command::Validate = cli.command {
        let root = match (&cli.out, &cli.config) {
            (Some(out), _) => out.clone(),
            (None, Some(_)) => context(cli)?.out,
            (None, None) => return Err(CliError::Config("validate needs --out or --config".into())),
        };
        let n = commands::cmd_validate(&root)?;
        println!("{}: {n} files valid", root.display());
        return Ok(());
    }
    let ctx = context(cli)?;
    with_threads(cli.threads, || match cli.command {
        Command::Sample { serial, parallel } => {
            let target = match (serial, parallel) {
                (true, false) => commands::SampleTarget::Serial,
                (false, true) => commands::SampleTarget::Parallel,
                _ => commands::SampleTarget::Both,
            };
            commands::cmd_sample(&ctx, target)
        }
        Command::Optimize => commands::cmd_optimize(&ctx),
        Command::Aggregate => commands::cmd_aggregate(&ctx),
        Command::Evaluate => commands::cmd_evaluate(&ctx),
        Command::Pipeline => commands::cmd_pipeline(&ctx),
        Command::Validate => unreachable!("handled above"),
    })?
}
