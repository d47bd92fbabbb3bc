//! Subcommand implementations. Each command reads its inputs from the
//! output directory (or explicit paths), writes its artifacts there, and
//! returns the list of written files for manifest checksumming.

pub mod explain;
pub mod predict;
pub mod prepare;
pub mod select;
pub mod synth;
pub mod train_eval;
pub mod tune;

use std::path::{Path, PathBuf};

use anyhow::anyhow;
use serde::Serialize;

use playerval::dataset::{FeatureTable, Imputer};
use playerval::evaltune::PipelineSpec;
use playerval::trees::ModelSpec;

use crate::config::Config;
use crate::errors::{internal, usage, CliResult};

pub const CORPUS_CSV: &str = "corpus.csv";
pub const TRAIN_CSV: &str = "train.csv";
pub const TEST_CSV: &str = "test.csv";
pub const BOXCOX_JSON: &str = "boxcox.json";
pub const PREPARE_REPORT: &str = "prepare_report.json";
pub const VERDICT_JSON: &str = "boruta_verdict.json";
pub const HISTORY_CSV: &str = "boruta_history.csv";
pub const CV_TABLE_CSV: &str = "cv_table.csv";
pub const TUNE_REPORT: &str = "tune_report.json";
pub const BEST_PARAMS: &str = "best_params.json";
pub const MODEL_JSON: &str = "model.json";
pub const METRICS_JSON: &str = "metrics.json";
pub const PREDICTIONS_CSV: &str = "predictions.csv";
pub const PREDICT_REPORT: &str = "predict_report.json";
pub const EXPLAIN_REPORT: &str = "explain_report.json";

/// Shared command context: resolved config plus the output directory.
pub struct Ctx {
    pub config: Config,
    pub out_dir: PathBuf,
}

impl Ctx {
    pub fn new(config: Config, out_dir: PathBuf) -> CliResult<Self> {
        std::fs::create_dir_all(&out_dir).map_err(internal)?;
        Ok(Self { config, out_dir })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(internal)?;
        }
        std::fs::write(&path, text).map_err(internal)?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(internal)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Reads a prepared table, requiring `prepare` to have run first.
    pub fn read_table(&self, name: &str) -> CliResult<FeatureTable> {
        let path = self.path(name);
        if !path.exists() {
            return Err(usage(anyhow!(
                "{} not found in {}; run `playerval prepare` first",
                name,
                self.out_dir.display()
            )));
        }
        Ok(FeatureTable::read_csv(&path)?)
    }

    /// The feature list chosen by `select`, or every feature of `table`
    /// when no verdict artifact exists yet.
    pub fn selected_features(&self, table: &FeatureTable) -> CliResult<Vec<String>> {
        let path = self.path(VERDICT_JSON);
        if !path.exists() {
            return Ok(table.feature_names().to_vec());
        }
        let text = std::fs::read_to_string(&path).map_err(internal)?;
        let report: select::SelectReport =
            serde_json::from_str(&text).map_err(internal)?;
        if report.selected.is_empty() {
            return Err(crate::errors::CliError::Data(anyhow!(
                "selection accepted no features; rerun `select` with different settings or \
                 remove {} to use all features",
                path.display()
            )));
        }
        Ok(report.selected)
    }

    /// The tuned model spec, or the family default when `tune` has not run.
    pub fn best_model_spec(&self) -> CliResult<ModelSpec> {
        let path = self.path(BEST_PARAMS);
        if !path.exists() {
            return Ok(match self.config.grid_spec().family {
                playerval::evaltune::ModelFamily::Gbdt => ModelSpec::Gbdt(Default::default()),
                playerval::evaltune::ModelFamily::Forest => ModelSpec::Forest(Default::default()),
            });
        }
        let text = std::fs::read_to_string(&path).map_err(internal)?;
        let best: tune::BestParams = serde_json::from_str(&text).map_err(internal)?;
        Ok(best.spec)
    }

    pub fn pipeline_spec(&self, model: ModelSpec) -> PipelineSpec {
        PipelineSpec { model, transform_target: true, impute: self.config.impute_enabled() }
    }

    /// Imputes a table in place when the missing policy asks for it; tables
    /// prepared under the drop policy never contain holes.
    pub fn impute_if_needed(&self, table: FeatureTable) -> CliResult<FeatureTable> {
        if table.has_missing() {
            let imputer = Imputer::fit(&table)?;
            Ok(imputer.apply(&table)?)
        } else {
            Ok(table)
        }
    }
}

/// Formats a float for CSV output (full roundtrip precision).
pub fn csv_float(v: f64) -> String {
    format!("{v}")
}

/// Writes CSV lines (already comma-joined) with a header.
pub fn write_csv_file(
    ctx: &Ctx,
    name: &str,
    header: &str,
    lines: &[String],
) -> CliResult<PathBuf> {
    let mut text = String::with_capacity(lines.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for line in lines {
        text.push_str(line);
        text.push('\n');
    }
    ctx.write_text(name, &text)
}

/// Seeded, sorted row sample of up to `cap` rows (0 means everything).
pub fn sample_rows(n: usize, cap: usize, seed: u64) -> Vec<usize> {
    if cap == 0 || cap >= n {
        return (0..n).collect();
    }
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, cap).into_vec();
    picked.sort_unstable();
    picked
}

pub fn file_stem_safe(feature: &str) -> String {
    feature
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

pub fn require_input(path: &Option<PathBuf>) -> CliResult<&Path> {
    path.as_deref().ok_or_else(|| {
        usage(anyhow!("no input CSV configured; set [input] path in the config or pass --input"))
    })
}
