//! `select`: Boruta feature selection on the prepared training table, with
//! the target on the transformed scale the downstream model sees.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use playerval::selection::{run_boruta, BorutaVerdict};
use playerval::transform::{forward, BoxCoxParams};

use crate::errors::{internal, CliResult};

use super::{csv_float, write_csv_file, Ctx, BOXCOX_JSON, HISTORY_CSV, TRAIN_CSV, VERDICT_JSON};

#[derive(Debug, Serialize, Deserialize)]
pub struct SelectReport {
    pub config: serde_json::Value,
    pub seed: u64,
    /// Features handed to downstream stages (accepted, plus tentative when
    /// the config says so), in input column order.
    pub selected: Vec<String>,
    pub include_tentative: bool,
    pub verdict: BorutaVerdict,
}

pub fn run(ctx: &Ctx) -> CliResult<Vec<PathBuf>> {
    let train = ctx.read_table(TRAIN_CSV)?;
    let train = ctx.impute_if_needed(train)?;

    let boxcox_text = std::fs::read_to_string(ctx.path(BOXCOX_JSON)).map_err(internal)?;
    let boxcox: BoxCoxParams = serde_json::from_str(&boxcox_text).map_err(internal)?;
    let transformed = forward(train.target(), &boxcox)?;
    let table = train.with_target(transformed)?;

    let verdict = run_boruta(&table, &ctx.config.boruta_config())?;
    let include_tentative = ctx.config.boruta.include_tentative;
    let selected = verdict.selected_features(include_tentative);

    let mut lines = Vec::new();
    for record in &verdict.importance_history {
        for (feature, importance) in table.feature_names().iter().zip(&record.importances) {
            if let Some(importance) = importance {
                lines.push(format!(
                    "{},{},{},{}",
                    record.iteration,
                    feature,
                    csv_float(*importance),
                    csv_float(record.shadow_max)
                ));
            }
        }
    }
    let history_path =
        write_csv_file(ctx, HISTORY_CSV, "iteration,feature,importance,shadow_max", &lines)?;

    let report = SelectReport {
        config: ctx.config.snapshot(),
        seed: ctx.config.run.seed,
        selected,
        include_tentative,
        verdict,
    };
    let verdict_path = ctx.write_json(VERDICT_JSON, &report)?;
    println!(
        "select: {} accepted, {} rejected, {} tentative in {} iterations -> {} features selected",
        report.verdict.accepted.len(),
        report.verdict.rejected.len(),
        report.verdict.tentative.len(),
        report.verdict.iterations_run,
        report.selected.len()
    );
    Ok(vec![verdict_path, history_path])
}
