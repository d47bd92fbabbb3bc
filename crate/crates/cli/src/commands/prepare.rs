//! `prepare`: load the player CSV, clean and partition it, cap values,
//! split train/test, and fit the target transform on the training side.

use std::path::PathBuf;

use anyhow::anyhow;
use serde::{Deserialize, Serialize};

use playerval::dataset::{
    cap_value, clean_and_partition, load_csv, train_test_split,
};
use playerval::transform::{fit_lambda, BoxCoxParams, FitOptions};

use crate::config::SchemaKind;
use crate::errors::{CliError, CliResult};

use super::{Ctx, BOXCOX_JSON, PREPARE_REPORT, TEST_CSV, TRAIN_CSV};

#[derive(Debug, Serialize, Deserialize)]
pub struct PrepareReport {
    pub config: serde_json::Value,
    pub seed: u64,
    pub input: String,
    pub schema: SchemaKind,
    pub loaded_rows: usize,
    pub parse_failures: usize,
    pub outfield_rows: usize,
    pub goalkeeper_rows: usize,
    pub cap_removed_rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub boxcox: BoxCoxParams,
}

pub fn run(ctx: &Ctx, input_flag: Option<PathBuf>) -> CliResult<Vec<PathBuf>> {
    let input = match &input_flag {
        Some(path) => path.clone(),
        None => super::require_input(&ctx.config.input.path)?.to_path_buf(),
    };
    let schema = ctx.config.input.schema.unwrap_or(SchemaKind::Outfield);
    let seed = ctx.config.run.seed;

    let records = load_csv(&input, &["name", "value"])?;
    let loaded_rows = records.len();
    let parse_failures = records.parse_failures;
    let (outfield, goalkeepers) = clean_and_partition(&records, ctx.config.missing_policy())?;
    let (outfield_rows, goalkeeper_rows) = (outfield.n_rows(), goalkeepers.n_rows());
    let table = match schema {
        SchemaKind::Outfield => outfield,
        SchemaKind::Goalkeeper => goalkeepers,
    };
    if table.n_rows() == 0 {
        return Err(CliError::Data(anyhow!(
            "no usable rows for the {schema:?} schema after cleaning"
        )));
    }

    let capped = cap_value(&table, ctx.config.prepare.value_cap);
    let cap_removed_rows = table.n_rows() - capped.n_rows();
    if capped.n_rows() == 0 {
        return Err(CliError::Data(anyhow!(
            "value cap {} removed every row",
            ctx.config.prepare.value_cap
        )));
    }

    let split = train_test_split(&capped, ctx.config.prepare.test_fraction, seed)?;
    let boxcox = fit_lambda(split.train.target(), &FitOptions::default())?;

    let train_path = ctx.path(TRAIN_CSV);
    let test_path = ctx.path(TEST_CSV);
    split.train.write_csv(&train_path)?;
    split.test.write_csv(&test_path)?;
    let boxcox_path = ctx.write_json(BOXCOX_JSON, &boxcox)?;

    let report = PrepareReport {
        config: ctx.config.snapshot(),
        seed,
        input: input.display().to_string(),
        schema,
        loaded_rows,
        parse_failures,
        outfield_rows,
        goalkeeper_rows,
        cap_removed_rows,
        train_rows: split.train.n_rows(),
        test_rows: split.test.n_rows(),
        boxcox,
    };
    let report_path = ctx.write_json(PREPARE_REPORT, &report)?;
    println!(
        "prepare: {} rows loaded, {} outfield / {} goalkeeper, {} above cap; \
         {} train / {} test, lambda {:.4}",
        loaded_rows,
        outfield_rows,
        goalkeeper_rows,
        cap_removed_rows,
        report.train_rows,
        report.test_rows,
        boxcox.lambda
    );
    Ok(vec![train_path, test_path, boxcox_path, report_path])
}
