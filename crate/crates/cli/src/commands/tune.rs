//! `tune`: exhaustive grid search with k-fold cross-validation over the
//! selected features.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use playerval::evaltune::{grid_search, GridSearchResult};
use playerval::trees::ModelSpec;

use crate::errors::CliResult;

use super::{csv_float, write_csv_file, Ctx, BEST_PARAMS, CV_TABLE_CSV, TRAIN_CSV, TUNE_REPORT};

#[derive(Debug, Serialize, Deserialize)]
pub struct BestParams {
    pub config: serde_json::Value,
    pub seed: u64,
    pub settings: Vec<(String, f64)>,
    pub spec: ModelSpec,
    pub mean_r_squared: f64,
    pub mean_rmse: f64,
}

#[derive(Debug, Serialize)]
pub struct TuneReport {
    pub config: serde_json::Value,
    pub seed: u64,
    pub k: usize,
    pub n_points: usize,
    pub best_index: usize,
    pub best_settings: Vec<(String, f64)>,
    pub points: Vec<TunePoint>,
}

#[derive(Debug, Serialize)]
pub struct TunePoint {
    pub point_index: usize,
    pub settings: Vec<(String, f64)>,
    pub mean_r_squared: f64,
    pub mean_rmse: f64,
    pub pooled_r_squared: Option<f64>,
    pub pooled_rmse: f64,
}

fn settings_label(settings: &[(String, f64)]) -> String {
    if settings.is_empty() {
        return "defaults".to_string();
    }
    settings
        .iter()
        .map(|(name, value)| format!("{name}={value}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn run(ctx: &Ctx) -> CliResult<Vec<PathBuf>> {
    let train = ctx.read_table(TRAIN_CSV)?;
    let selected = ctx.selected_features(&train)?;
    let table = train.select_features(&selected)?;
    let seed = ctx.config.run.seed;
    let k = ctx.config.tune.k;

    let result: GridSearchResult = grid_search(
        &ctx.config.grid_spec(),
        &table,
        k,
        seed,
        ctx.config.metric_scale(),
        ctx.config.select_by(),
        true,
        ctx.config.impute_enabled(),
    )?;

    // One CSV row per grid point and fold on both scales, plus mean rows.
    let mut lines = Vec::new();
    for row in &result.rows {
        let label = settings_label(&row.settings);
        for (fold, outcome) in row.cv.folds.iter().enumerate() {
            lines.push(format!(
                "{},{},{},{},{},{},{}",
                row.point_index,
                label,
                fold,
                outcome.euro.r_squared.map(csv_float).unwrap_or_default(),
                csv_float(outcome.euro.rmse),
                outcome.transformed.r_squared.map(csv_float).unwrap_or_default(),
                csv_float(outcome.transformed.rmse),
            ));
        }
        lines.push(format!(
            "{},{},mean,{},{},,",
            row.point_index,
            label,
            csv_float(row.cv.mean_r_squared),
            csv_float(row.cv.mean_rmse),
        ));
    }
    let cv_path = write_csv_file(
        ctx,
        CV_TABLE_CSV,
        "point_index,settings,fold,euro_r2,euro_rmse,transformed_r2,transformed_rmse",
        &lines,
    )?;

    let best_cv = &result.rows[result.best_index].cv;
    let best = BestParams {
        config: ctx.config.snapshot(),
        seed,
        settings: result.best_settings.clone(),
        spec: result.best_spec,
        mean_r_squared: best_cv.mean_r_squared,
        mean_rmse: best_cv.mean_rmse,
    };
    let best_path = ctx.write_json(BEST_PARAMS, &best)?;

    let report = TuneReport {
        config: ctx.config.snapshot(),
        seed,
        k,
        n_points: result.rows.len(),
        best_index: result.best_index,
        best_settings: result.best_settings.clone(),
        points: result
            .rows
            .iter()
            .map(|row| TunePoint {
                point_index: row.point_index,
                settings: row.settings.clone(),
                mean_r_squared: row.cv.mean_r_squared,
                mean_rmse: row.cv.mean_rmse,
                pooled_r_squared: row.cv.pooled.r_squared,
                pooled_rmse: row.cv.pooled.rmse,
            })
            .collect(),
    };
    let report_path = ctx.write_json(TUNE_REPORT, &report)?;
    println!(
        "tune: {} grid points x {} folds; best [{}] mean R^2 {:.4}, mean RMSE {:.1}",
        report.n_points,
        k,
        settings_label(&result.best_settings),
        best.mean_r_squared,
        best.mean_rmse
    );
    Ok(vec![cv_path, best_path, report_path])
}
