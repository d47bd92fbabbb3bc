//! Pipeline configuration: a single TOML file with per-stage sections,
//! every field optional with documented defaults. Command-line flags
//! override file values; the resolved snapshot is embedded in every report
//! and manifest stage so runs are auditable.

use std::path::{Path, PathBuf};

use anyhow::Context as _;
use serde::{Deserialize, Serialize};

use playerval::evaltune::{GridSpec, ModelFamily, SelectBy};
use playerval::explain::Scale;
use playerval::dataset::MissingPolicy;
use playerval::selection::{BorutaConfig, ImportanceSource};
use playerval::trees::{FeatureSubsample, ForestParams, ModelSpec, TreeParams};

use crate::errors::{usage, CliResult};

/// Environment variable supplying the default output directory.
pub const OUT_DIR_ENV: &str = "PLAYERVAL_OUT_DIR";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub input: InputSection,
    pub run: RunSection,
    pub prepare: PrepareSection,
    pub boruta: BorutaSection,
    pub tune: TuneSection,
    pub train: TrainSection,
    pub explain: ExplainSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaKind {
    Outfield,
    Goalkeeper,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    /// Player CSV to prepare. Required by `prepare`.
    pub path: Option<PathBuf>,
    pub schema: Option<SchemaKind>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 42, output_dir: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingKind {
    Drop,
    Impute,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepareSection {
    pub value_cap: f64,
    pub test_fraction: f64,
    pub missing: MissingKind,
}

impl Default for PrepareSection {
    fn default() -> Self {
        Self { value_cap: 25_000_000.0, test_fraction: 0.2, missing: MissingKind::Drop }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceKind {
    Shap,
    Gain,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BorutaSection {
    pub max_iterations: usize,
    pub alpha: f64,
    pub importance: ImportanceKind,
    /// Row cap for SHAP importance; 0 means all rows.
    pub shap_rows: usize,
    pub min_iterations: usize,
    /// Feed tentative features to downstream stages too.
    pub include_tentative: bool,
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
}

impl Default for BorutaSection {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            alpha: 0.05,
            importance: ImportanceKind::Shap,
            shap_rows: 256,
            min_iterations: 5,
            include_tentative: false,
            n_estimators: 700,
            max_depth: 15,
            min_samples_leaf: 3,
            min_samples_split: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleKind {
    Euro,
    Transformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectKind {
    RSquared,
    Rmse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Gbdt,
    Forest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneSection {
    pub k: usize,
    pub scale: ScaleKind,
    pub select_by: SelectKind,
    pub family: FamilyKind,
    pub learning_rate: Vec<f64>,
    pub max_depth: Vec<f64>,
    pub n_estimators: Vec<f64>,
    pub min_samples_leaf: Vec<f64>,
    pub min_samples_split: Vec<f64>,
    pub feature_subsample: Vec<f64>,
}

impl Default for TuneSection {
    fn default() -> Self {
        // Grid centered on the reference GBDT setting
        // (learning_rate 0.1, max_depth 3, n_estimators 900).
        Self {
            k: 5,
            scale: ScaleKind::Euro,
            select_by: SelectKind::RSquared,
            family: FamilyKind::Gbdt,
            learning_rate: vec![0.05, 0.1],
            max_depth: vec![2.0, 3.0],
            n_estimators: vec![900.0],
            min_samples_leaf: vec![],
            min_samples_split: vec![],
            feature_subsample: vec![],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    /// Folds for the training-side CV report.
    pub cv_k: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self { cv_k: 5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainSection {
    /// How many leading features get beeswarm/PDP/dependence exports.
    pub top_k: usize,
    pub grid_size: usize,
    /// Row indices (into the explained table) for force plots.
    pub rows: Vec<usize>,
    /// Row cap for the global explanation sample; 0 means all rows.
    pub sample_rows: usize,
    pub svg: bool,
}

impl Default for ExplainSection {
    fn default() -> Self {
        Self { top_k: 9, grid_size: 50, rows: vec![0], sample_rows: 500, svg: true }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> CliResult<Config> {
        match path {
            None => Ok(Config::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))
                    .map_err(usage)?;
                toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))
                    .map_err(usage)
            }
        }
    }

    pub fn missing_policy(&self) -> MissingPolicy {
        match self.prepare.missing {
            MissingKind::Drop => MissingPolicy::Drop,
            MissingKind::Impute => MissingPolicy::Impute,
        }
    }

    pub fn impute_enabled(&self) -> bool {
        self.prepare.missing == MissingKind::Impute
    }

    pub fn metric_scale(&self) -> Scale {
        match self.tune.scale {
            ScaleKind::Euro => Scale::Euro,
            ScaleKind::Transformed => Scale::Transformed,
        }
    }

    pub fn select_by(&self) -> SelectBy {
        match self.tune.select_by {
            SelectKind::RSquared => SelectBy::MeanRSquared,
            SelectKind::Rmse => SelectBy::MeanRmse,
        }
    }

    pub fn boruta_config(&self) -> BorutaConfig {
        let section = &self.boruta;
        BorutaConfig {
            max_iterations: section.max_iterations,
            alpha: section.alpha,
            importance_source: match section.importance {
                ImportanceKind::Shap => ImportanceSource::Shap,
                ImportanceKind::Gain => ImportanceSource::Gain,
            },
            model: ModelSpec::Forest(ForestParams {
                n_estimators: section.n_estimators,
                bootstrap: true,
                tree: TreeParams {
                    max_depth: section.max_depth,
                    min_samples_split: section.min_samples_split,
                    min_samples_leaf: section.min_samples_leaf,
                    feature_subsample: FeatureSubsample::Sqrt,
                },
            }),
            seed: self.run.seed,
            min_iterations: section.min_iterations,
            shap_rows: if section.shap_rows == 0 { None } else { Some(section.shap_rows) },
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        let section = &self.tune;
        let family = match section.family {
            FamilyKind::Gbdt => ModelFamily::Gbdt,
            FamilyKind::Forest => ModelFamily::Forest,
        };
        let mut axes: Vec<(String, Vec<f64>)> = Vec::new();
        let mut push = |name: &str, values: &Vec<f64>| {
            if !values.is_empty() {
                axes.push((name.to_string(), values.clone()));
            }
        };
        if family == ModelFamily::Gbdt {
            push("learning_rate", &section.learning_rate);
        }
        push("n_estimators", &section.n_estimators);
        push("max_depth", &section.max_depth);
        push("min_samples_split", &section.min_samples_split);
        push("min_samples_leaf", &section.min_samples_leaf);
        if family == ModelFamily::Forest {
            push("feature_subsample", &section.feature_subsample);
        }
        GridSpec { family, axes }
    }

    /// JSON snapshot embedded in reports and manifest stages.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Resolves the output directory: flag beats config beats environment beats
/// the `playerval-out` default.
pub fn resolve_out_dir(flag: Option<PathBuf>, config: &Config) -> PathBuf {
    flag.or_else(|| config.run.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("playerval-out"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_sane() {
        let config = Config::default();
        assert_eq!(config.run.seed, 42);
        assert_eq!(config.prepare.value_cap, 25_000_000.0);
        assert_eq!(config.tune.k, 5);
        assert_eq!(config.explain.top_k, 9);
        assert_eq!(config.grid_spec().n_points(), 4);
    }

    #[test]
    fn toml_roundtrip_with_overridden_fields() {
        let text = r#"
            [input]
            path = "players.csv"
            schema = "outfield"

            [run]
            seed = 7

            [tune]
            family = "forest"
            n_estimators = [100, 200]
            max_depth = [10]
            feature_subsample = [0.3]
        "#;
        let config: Config = toml::from_str(text).unwrap();
        assert_eq!(config.run.seed, 7);
        assert_eq!(config.tune.family, FamilyKind::Forest);
        let grid = config.grid_spec();
        assert_eq!(grid.n_points(), 2);
        assert!(grid.axes.iter().any(|(name, _)| name == "feature_subsample"));
        // Unknown fields are rejected.
        assert!(toml::from_str::<Config>("[run]\nsped = 3\n").is_err());
    }
}
