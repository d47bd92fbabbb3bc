//! `train-eval`: fit the final pipeline on the full training table with the
//! tuned parameters, report training-side CV and the held-out test metrics,
//! and persist the model artifact.

use std::path::PathBuf;

use serde::Serialize;

use playerval::artifact::ModelArtifact;
use playerval::evaltune::{cross_validate, fit_pipeline, CvResult, FoldOutcome};
use playerval::trees::ModelSpec;

use crate::errors::CliResult;

use super::{Ctx, METRICS_JSON, MODEL_JSON, TEST_CSV, TRAIN_CSV};

#[derive(Debug, Serialize)]
pub struct MetricsReport {
    pub config: serde_json::Value,
    pub seed: u64,
    pub params: ModelSpec,
    pub selected_features: Vec<String>,
    pub train_cv: CvSummary,
    pub test: FoldOutcome,
}

#[derive(Debug, Serialize)]
pub struct CvSummary {
    pub k: usize,
    pub mean_r_squared: f64,
    pub mean_rmse: f64,
    pub pooled_r_squared: Option<f64>,
    pub pooled_rmse: f64,
    pub folds: Vec<FoldOutcome>,
}

impl From<CvResult> for CvSummary {
    fn from(cv: CvResult) -> Self {
        Self {
            k: cv.k,
            mean_r_squared: cv.mean_r_squared,
            mean_rmse: cv.mean_rmse,
            pooled_r_squared: cv.pooled.r_squared,
            pooled_rmse: cv.pooled.rmse,
            folds: cv.folds,
        }
    }
}

pub fn run(ctx: &Ctx) -> CliResult<Vec<PathBuf>> {
    let train = ctx.read_table(TRAIN_CSV)?;
    let selected = ctx.selected_features(&train)?;
    let train = train.select_features(&selected)?;
    let spec = ctx.pipeline_spec(ctx.best_model_spec()?);
    let seed = ctx.config.run.seed;

    let train_cv =
        cross_validate(&spec, &train, ctx.config.train.cv_k, seed, ctx.config.metric_scale())?;

    let pipeline = fit_pipeline(&spec, &train, seed)?;
    let artifact =
        ModelArtifact::new(pipeline.model.clone(), selected.clone(), pipeline.boxcox, seed);
    let model_path = ctx.path(MODEL_JSON);
    artifact.save(&model_path)?;

    // The held-out table is read only now, for the final scoring step.
    let test = ctx.read_table(TEST_CSV)?.select_features(&selected)?;
    let test_outcome = pipeline.score(&test)?;

    let report = MetricsReport {
        config: ctx.config.snapshot(),
        seed,
        params: spec.model,
        selected_features: selected,
        train_cv: train_cv.into(),
        test: test_outcome,
    };
    let metrics_path = ctx.write_json(METRICS_JSON, &report)?;
    println!(
        "train-eval: CV mean R^2 {:.4} / RMSE {:.1}; test R^2 {} / RMSE {:.1} (euro scale)",
        report.train_cv.mean_r_squared,
        report.train_cv.mean_rmse,
        report
            .test
            .euro
            .r_squared
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "n/a".to_string()),
        report.test.euro.rmse
    );
    Ok(vec![model_path, metrics_path])
}
