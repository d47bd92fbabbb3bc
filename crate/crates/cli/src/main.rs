//! Pipeline CLI for player market-value modeling.
//!
//! Subcommands chain the library end to end: `synth` emits a test corpus,
//! `prepare` cleans/caps/splits and fits the target transform, `select`
//! runs Boruta, `tune` grid-searches with k-fold CV, `train-eval` fits and
//! scores the final model, `explain` writes SHAP/PDP artifacts, and
//! `predict` scores new rows. One seed in the config determines every
//! downstream artifact byte for byte.

mod commands;
mod config;
mod errors;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::Ctx;
use config::{resolve_out_dir, Config};
use errors::CliResult;

#[derive(Parser)]
#[command(
    name = "playerval",
    version,
    about = "Player market-value modeling: prepare, select, tune, train, explain, predict"
)]
struct Cli {
    /// TOML config file; command-line flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (defaults to config, then $PLAYERVAL_OUT_DIR, then ./playerval-out).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed override; recorded in every emitted artifact.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic schema-complete player corpus CSV.
    Synth {
        /// Number of rows to generate.
        #[arg(long)]
        rows: Option<usize>,
        /// Fraction of goalkeeper rows.
        #[arg(long)]
        goalkeeper_fraction: Option<f64>,
        /// Per-cell probability of a blank skill cell.
        #[arg(long)]
        missing_rate: Option<f64>,
        /// Output file (defaults to <out-dir>/corpus.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load, clean, partition, cap, split, and fit the target transform.
    Prepare {
        /// Player CSV (overrides [input] path in the config).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Boruta all-relevant feature selection on the prepared training table.
    Select,
    /// Grid-search hyperparameters with k-fold cross-validation.
    Tune,
    /// Train the final model and evaluate on the held-out test split.
    TrainEval,
    /// Export global and local SHAP explanations, PDP curves, and plots.
    Explain {
        /// Model artifact (defaults to <out-dir>/model.json).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Data table to explain (defaults to <out-dir>/train.csv).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Row indices for force plots (defaults to the config's list).
        #[arg(long)]
        rows: Vec<usize>,
    },
    /// Predict a CSV of player rows on both scales.
    Predict {
        /// Model artifact (defaults to <out-dir>/model.json).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Input CSV whose columns cover the model features.
        #[arg(long)]
        input: PathBuf,
        /// Output CSV (defaults to <out-dir>/predictions.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn stage_name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Prepare { .. } => "prepare",
            Command::Select => "select",
            Command::Tune => "tune",
            Command::TrainEval => "train-eval",
            Command::Explain { .. } => "explain",
            Command::Predict { .. } => "predict",
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut config = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    let out_dir = resolve_out_dir(cli.out_dir, &config);
    let stage = cli.command.stage_name();
    let ctx = Ctx::new(config, out_dir)?;

    let started = Instant::now();
    let artifacts = match cli.command {
        Command::Synth { rows, goalkeeper_fraction, missing_rate, out } => {
            commands::synth::run(&ctx, rows, goalkeeper_fraction, missing_rate, out)?
        }
        Command::Prepare { input } => commands::prepare::run(&ctx, input)?,
        Command::Select => commands::select::run(&ctx)?,
        Command::Tune => commands::tune::run(&ctx)?,
        Command::TrainEval => commands::train_eval::run(&ctx)?,
        Command::Explain { model, data, rows } => {
            commands::explain::run(&ctx, model, data, rows)?
        }
        Command::Predict { model, input, out } => {
            commands::predict::run(&ctx, model, input, out)?
        }
    };
    manifest::record_stage(
        &ctx.out_dir,
        stage,
        ctx.config.run.seed,
        ctx.config.snapshot(),
        started.elapsed(),
        &artifacts,
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {}", error.message());
            ExitCode::from(error.exit_code())
        }
    }
}
