//! `predict`: score a CSV of player rows with a saved model, emitting both
//! the transformed and euro scales. Predictions that leave the transform's
//! image are flagged, never clamped.

use std::path::PathBuf;

use serde::Serialize;

use playerval::artifact::ModelArtifact;
use playerval::dataset::read_feature_matrix;
use playerval::transform::{inverse_one, TransformError};

use crate::errors::CliResult;

use super::{csv_float, write_csv_file, Ctx, MODEL_JSON, PREDICTIONS_CSV, PREDICT_REPORT};

#[derive(Debug, Serialize)]
pub struct PredictReport {
    pub config: serde_json::Value,
    pub seed: u64,
    pub model: String,
    pub input: String,
    pub rows: usize,
    pub out_of_domain_rows: usize,
}

pub fn run(
    ctx: &Ctx,
    model_flag: Option<PathBuf>,
    input: PathBuf,
    out_flag: Option<PathBuf>,
) -> CliResult<Vec<PathBuf>> {
    let model_path = model_flag.unwrap_or_else(|| ctx.path(MODEL_JSON));
    let artifact = ModelArtifact::load(&model_path)?;
    let (row_ids, matrix) = read_feature_matrix(&input, &artifact.feature_names)?;
    let transformed = artifact.model.predict(&matrix)?;

    let mut out_of_domain_rows = 0usize;
    let mut lines = Vec::with_capacity(row_ids.len());
    for (row_id, &t) in row_ids.iter().zip(&transformed) {
        let (euro, flagged) = match &artifact.boxcox {
            None => (csv_float(t), false),
            Some(params) => match inverse_one(t, params) {
                Ok(euro) => (csv_float(euro), false),
                Err(TransformError::OutOfDomain { .. }) => (String::new(), true),
                Err(e) => return Err(e.into()),
            },
        };
        if flagged {
            out_of_domain_rows += 1;
        }
        lines.push(format!("{row_id},{},{euro},{flagged}", csv_float(t)));
    }

    let out_name = out_flag
        .as_ref()
        .and_then(|p| p.to_str())
        .map(str::to_string)
        .unwrap_or_else(|| PREDICTIONS_CSV.to_string());
    let predictions_path = match out_flag {
        Some(path) => {
            let mut text = String::from("name,transformed,euro,out_of_domain\n");
            for line in &lines {
                text.push_str(line);
                text.push('\n');
            }
            std::fs::write(&path, text).map_err(crate::errors::internal)?;
            path
        }
        None => write_csv_file(
            ctx,
            PREDICTIONS_CSV,
            "name,transformed,euro,out_of_domain",
            &lines,
        )?,
    };

    let report = PredictReport {
        config: ctx.config.snapshot(),
        seed: ctx.config.run.seed,
        model: model_path.display().to_string(),
        input: input.display().to_string(),
        rows: row_ids.len(),
        out_of_domain_rows,
    };
    let report_path = ctx.write_json(PREDICT_REPORT, &report)?;
    println!(
        "predict: {} rows -> {} ({} out of domain)",
        report.rows, out_name, out_of_domain_rows
    );
    Ok(vec![predictions_path, report_path])
}
