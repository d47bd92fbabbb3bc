//! `synth`: generate a schema-complete synthetic player corpus.

use std::path::PathBuf;

use playerval::synth::{sofifa_corpus_csv, CorpusOptions};

use crate::errors::{internal, CliResult};

use super::{Ctx, CORPUS_CSV};

pub fn run(
    ctx: &Ctx,
    rows: Option<usize>,
    goalkeeper_fraction: Option<f64>,
    missing_rate: Option<f64>,
    out: Option<PathBuf>,
) -> CliResult<Vec<PathBuf>> {
    let defaults = CorpusOptions::default();
    let opts = CorpusOptions {
        n_rows: rows.unwrap_or(defaults.n_rows),
        goalkeeper_fraction: goalkeeper_fraction.unwrap_or(defaults.goalkeeper_fraction),
        missing_cell_rate: missing_rate.unwrap_or(defaults.missing_cell_rate),
        seed: ctx.config.run.seed,
    };
    let csv = sofifa_corpus_csv(&opts);
    let path = out.unwrap_or_else(|| ctx.path(CORPUS_CSV));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(internal)?;
        }
    }
    std::fs::write(&path, csv).map_err(internal)?;
    println!("synth: {} rows (seed {}) -> {}", opts.n_rows, opts.seed, path.display());
    Ok(vec![path])
}
