//! `explain`: global and local SHAP artifacts for a trained model — mean
//! |SHAP| importance, beeswarm data, per-row force records, partial
//! dependence, and SHAP dependence scatters, as CSV/JSON plus static SVG.

use std::path::PathBuf;

use serde::Serialize;

use playerval::artifact::ModelArtifact;
use playerval::explain::{
    beeswarm_data, force_data, mean_abs_importance, pdp, shap_dependence, tree_shap,
};

use crate::errors::CliResult;
use crate::svg;

use super::{csv_float, file_stem_safe, sample_rows, write_csv_file, Ctx, EXPLAIN_REPORT,
    MODEL_JSON, TRAIN_CSV};

#[derive(Debug, Serialize)]
pub struct ExplainReport {
    pub config: serde_json::Value,
    pub seed: u64,
    pub model: String,
    pub data: String,
    pub explained_rows: usize,
    pub base_value: f64,
    pub top_features: Vec<(String, f64)>,
    pub force_rows: Vec<usize>,
}

pub fn run(
    ctx: &Ctx,
    model_flag: Option<PathBuf>,
    data_flag: Option<PathBuf>,
    rows_flag: Vec<usize>,
) -> CliResult<Vec<PathBuf>> {
    let model_path = model_flag.unwrap_or_else(|| ctx.path(MODEL_JSON));
    let artifact = ModelArtifact::load(&model_path)?;
    let data_path = data_flag.unwrap_or_else(|| ctx.path(TRAIN_CSV));
    let data = playerval::dataset::FeatureTable::read_csv(&data_path)?;
    let table = ctx.impute_if_needed(data.select_features(&artifact.feature_names)?)?;

    let section = &ctx.config.explain;
    let seed = ctx.config.run.seed;
    let mut written = Vec::new();

    // Global explanation on a seeded row sample.
    let sample = table.subset_rows(&sample_rows(table.n_rows(), section.sample_rows, seed));
    let explanation = tree_shap(&artifact.model, &sample)?;

    let importance = mean_abs_importance(&explanation);
    let lines: Vec<String> = importance
        .iter()
        .map(|(name, score)| format!("{name},{}", csv_float(*score)))
        .collect();
    written.push(write_csv_file(ctx, "importance.csv", "feature,mean_abs_shap", &lines)?);
    if section.svg {
        let top: Vec<(String, f64)> =
            importance.iter().take(section.top_k).cloned().collect();
        written.push(ctx.write_text("importance.svg", &svg::importance_bars(&top))?);
    }

    let swarm = beeswarm_data(&explanation, section.top_k);
    let lines: Vec<String> = swarm
        .iter()
        .map(|row| {
            format!(
                "{},{},{},{},{}",
                row.feature,
                row.row_id,
                csv_float(row.shap_value),
                csv_float(row.feature_value),
                csv_float(row.feature_value_percentile)
            )
        })
        .collect();
    written.push(write_csv_file(
        ctx,
        "beeswarm.csv",
        "feature,row_id,shap_value,feature_value,feature_value_percentile",
        &lines,
    )?);
    let top_names: Vec<String> =
        importance.iter().take(section.top_k).map(|(name, _)| name.clone()).collect();
    if section.svg {
        written.push(ctx.write_text("beeswarm.svg", &svg::beeswarm(&swarm, &top_names))?);
    }

    // Local force records for the requested rows of the full table.
    let force_rows = if rows_flag.is_empty() { section.rows.clone() } else { rows_flag };
    if !force_rows.is_empty() {
        let row_explanation = tree_shap(&artifact.model, &table.subset_rows(&force_rows))?;
        for (position, &row) in force_rows.iter().enumerate() {
            let force = force_data(&row_explanation, position, artifact.boxcox.as_ref())?;
            written.push(ctx.write_json(&format!("force_row{row}.json"), &force)?);
            if section.svg {
                written
                    .push(ctx.write_text(&format!("force_row{row}.svg"), &svg::force_plot(&force))?);
            }
        }
    }

    // Partial dependence and SHAP dependence for the leading features.
    for feature in &top_names {
        let stem = file_stem_safe(feature);
        let curve = pdp(&artifact.model, &sample, feature, section.grid_size)?;
        let lines: Vec<String> = curve
            .grid
            .iter()
            .zip(&curve.mean_prediction)
            .map(|(g, p)| format!("{feature},{},{},transformed", csv_float(*g), csv_float(*p)))
            .collect();
        written.push(write_csv_file(
            ctx,
            &format!("pdp_{stem}.csv"),
            "feature,grid_value,mean_prediction,scale",
            &lines,
        )?);
        if section.svg {
            written.push(ctx.write_text(&format!("pdp_{stem}.svg"), &svg::pdp_line(&curve))?);
        }

        let scatter = shap_dependence(&explanation, feature)?;
        let lines: Vec<String> = scatter
            .iter()
            .map(|(value, phi)| format!("{feature},{},{}", csv_float(*value), csv_float(*phi)))
            .collect();
        written.push(write_csv_file(
            ctx,
            &format!("dependence_{stem}.csv"),
            "feature,feature_value,shap_value",
            &lines,
        )?);
    }

    let report = ExplainReport {
        config: ctx.config.snapshot(),
        seed,
        model: model_path.display().to_string(),
        data: data_path.display().to_string(),
        explained_rows: sample.n_rows(),
        base_value: explanation.base_value,
        top_features: importance.into_iter().take(section.top_k).collect(),
        force_rows,
    };
    written.push(ctx.write_json(EXPLAIN_REPORT, &report)?);
    println!(
        "explain: {} rows explained, base value {:.4}, top feature {}",
        report.explained_rows,
        report.base_value,
        report.top_features.first().map(|(n, _)| n.as_str()).unwrap_or("n/a")
    );
    Ok(written)
}
