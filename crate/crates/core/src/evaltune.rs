//! Metrics (R², RMSE), k-fold cross-validation, and exhaustive grid search
//! over regressor hyperparameters.
//!
//! Cross-validation fits the whole per-fold pipeline — imputation means and
//! Box-Cox lambda included — on the training folds only, so no statistic
//! ever sees held-out rows. Every grid point is evaluated on identical fold
//! assignments, making the comparison paired.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DatasetError, FeatureTable, Imputer};
use crate::explain::Scale;
use crate::transform::{self, BoxCoxParams, FitOptions, TransformError};
use crate::trees::{
    FeatureSubsample, ForestParams, GbdtParams, ModelSpec, TreeParams, TreesError,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("y_true has zero variance; R^2 undefined")]
    ZeroVariance,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("k must satisfy 2 <= k <= n, got k={k} with n={n}")]
    BadK { k: usize, n: usize },
    #[error("fold {fold} failed: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: FitError,
    },
    #[error("empty grid axis {0:?}")]
    EmptyAxis(String),
    #[error("unknown grid axis {axis:?} for family {family:?}")]
    UnknownAxis { axis: String, family: String },
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Errors from fitting one fold's pipeline.
#[derive(Debug, Error)]
pub enum FitError {
    #[error(transparent)]
    Trees(#[from] TreesError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// R² = 1 - SS_res / SS_tot.
pub fn r_squared(y_true: &[f64], y_pred: &[f64]) -> Result<f64, EvalError> {
    check_lengths(y_true, y_pred)?;
    let n = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / n;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot <= 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    let ss_res: f64 =
        y_true.iter().zip(y_pred).map(|(y, p)| (y - p) * (y - p)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Root mean squared error.
pub fn rmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64, EvalError> {
    check_lengths(y_true, y_pred)?;
    let n = y_true.len() as f64;
    let mse: f64 =
        y_true.iter().zip(y_pred).map(|(y, p)| (y - p) * (y - p)).sum::<f64>() / n;
    Ok(mse.sqrt())
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<(), EvalError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(EvalError::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

/// R²/RMSE pair on a named scale. `r_squared` is `None` when the fold's true
/// targets are constant (single-row folds in leave-one-out).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub r_squared: Option<f64>,
    pub rmse: f64,
    pub scale: Scale,
}

fn metric_report(y_true: &[f64], y_pred: &[f64], scale: Scale) -> Result<MetricReport, EvalError> {
    let r2 = match r_squared(y_true, y_pred) {
        Ok(v) => Some(v),
        Err(EvalError::ZeroVariance) => None,
        Err(e) => return Err(e),
    };
    Ok(MetricReport { r_squared: r2, rmse: rmse(y_true, y_pred)?, scale })
}

/// Fold id per row: a seeded random permutation chunked into `k` near-equal
/// folds (the first `n mod k` folds get the extra row).
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    if k < 2 || k > n {
        return Err(EvalError::BadK { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = n / k;
    let remainder = n % k;
    let mut assignment = vec![0usize; n];
    let mut cursor = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < remainder);
        for &row in &order[cursor..cursor + size] {
            assignment[row] = fold;
        }
        cursor += size;
    }
    Ok(assignment)
}

/// What gets fitted per fold: the model plus the preprocessing that must be
/// estimated from training rows only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub model: ModelSpec,
    /// Fit a Box-Cox transform on training targets and model in that space.
    pub transform_target: bool,
    /// Fit column-mean imputation on training rows and apply to both sides.
    pub impute: bool,
}

impl PipelineSpec {
    pub fn new(model: ModelSpec) -> Self {
        Self { model, transform_target: true, impute: false }
    }
}

/// Statistics fitted from training rows during one fold; exposed so tests
/// can prove the held-out rows never influence them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldStats {
    pub boxcox: Option<BoxCoxParams>,
    pub imputation_means: Option<Vec<f64>>,
}

/// Metrics and fitted statistics for one train/evaluate round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub transformed: MetricReport,
    pub euro: MetricReport,
    pub stats: FoldStats,
    /// Held-out predictions on the euro scale, in held-out row order.
    pub predictions_euro: Vec<f64>,
}

impl FoldOutcome {
    pub fn on_scale(&self, scale: Scale) -> &MetricReport {
        match scale {
            Scale::Transformed => &self.transformed,
            Scale::Euro => &self.euro,
        }
    }
}

/// A pipeline fitted on one training table: the model plus whatever
/// preprocessing was estimated alongside it.
#[derive(Debug, Clone)]
pub struct FittedPipeline {
    pub model: crate::trees::FittedModel,
    pub boxcox: Option<BoxCoxParams>,
    pub imputer: Option<Imputer>,
}

impl FittedPipeline {
    /// Model-scale predictions for a table (imputing first when fitted so).
    pub fn predict_transformed(&self, table: &FeatureTable) -> Result<Vec<f64>, FitError> {
        let table = match &self.imputer {
            Some(imputer) => imputer.apply(table)?,
            None => table.clone(),
        };
        Ok(self.model.predict(table.matrix())?)
    }

    /// Scores a held-out table on both scales.
    pub fn score(&self, test: &FeatureTable) -> Result<FoldOutcome, FitError> {
        let predictions = self.predict_transformed(test)?;
        let (test_transformed, predictions_euro): (Vec<f64>, Vec<f64>) = match &self.boxcox {
            Some(params) => (
                transform::forward(test.target(), params)?,
                transform::inverse(&predictions, params)?,
            ),
            None => (test.target().to_vec(), predictions.clone()),
        };
        let transformed = metric_report(&test_transformed, &predictions, Scale::Transformed)
            .expect("fold sides are non-empty");
        let euro = metric_report(test.target(), &predictions_euro, Scale::Euro)
            .expect("fold sides are non-empty");
        Ok(FoldOutcome {
            transformed,
            euro,
            stats: FoldStats {
                boxcox: self.boxcox,
                imputation_means: self.imputer.as_ref().map(|i| i.means.clone()),
            },
            predictions_euro,
        })
    }
}

/// Fits the whole per-fold pipeline on a training table: imputation means
/// and Box-Cox lambda come from these rows only.
pub fn fit_pipeline(
    spec: &PipelineSpec,
    train: &FeatureTable,
    seed: u64,
) -> Result<FittedPipeline, FitError> {
    let (train, imputer) = if spec.impute {
        let imputer = Imputer::fit(train)?;
        (imputer.apply(train)?, Some(imputer))
    } else {
        (train.clone(), None)
    };
    let (boxcox, train_targets) = if spec.transform_target {
        let params = transform::fit_lambda(train.target(), &FitOptions::default())?;
        (Some(params), transform::forward(train.target(), &params)?)
    } else {
        (None, train.target().to_vec())
    };
    let model = spec.model.fit(train.matrix(), &train_targets, seed)?;
    Ok(FittedPipeline { model, boxcox, imputer })
}

/// Fits the pipeline on `train` and scores it on `test`, reporting metrics
/// on both scales. This is the single fold primitive that cross-validation
/// and the final train/evaluate step share.
pub fn run_fold(
    spec: &PipelineSpec,
    train: &FeatureTable,
    test: &FeatureTable,
    seed: u64,
) -> Result<FoldOutcome, FitError> {
    fit_pipeline(spec, train, seed)?.score(test)
}

/// Cross-validation result: per-fold metrics on both scales, the pooled
/// out-of-fold metrics, and the means on the requested scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<FoldOutcome>,
    /// Mean per-fold R² on the requested scale, over folds where defined.
    pub mean_r_squared: f64,
    /// Mean per-fold RMSE on the requested scale.
    pub mean_rmse: f64,
    /// Metrics over the concatenated out-of-fold predictions (requested
    /// scale); defined even when single-row folds make per-fold R² vacuous.
    pub pooled: MetricReport,
    pub fold_assignments: Vec<usize>,
    pub k: usize,
    pub seed: u64,
    pub scale: Scale,
}

/// k-fold cross-validation of the pipeline. Each fold refits imputation and
/// the Box-Cox transform on its own training side.
pub fn cross_validate(
    spec: &PipelineSpec,
    table: &FeatureTable,
    k: usize,
    seed: u64,
    scale: Scale,
) -> Result<CvResult, EvalError> {
    let assignments = kfold_split(table.n_rows(), k, seed)?;
    cross_validate_with_folds(spec, table, &assignments, k, seed, scale)
}

fn cross_validate_with_folds(
    spec: &PipelineSpec,
    table: &FeatureTable,
    assignments: &[usize],
    k: usize,
    seed: u64,
    scale: Scale,
) -> Result<CvResult, EvalError> {
    let mut folds = Vec::with_capacity(k);
    let mut pooled_true = Vec::with_capacity(table.n_rows());
    let mut pooled_pred = Vec::with_capacity(table.n_rows());
    for fold in 0..k {
        let train_rows: Vec<usize> =
            (0..table.n_rows()).filter(|&r| assignments[r] != fold).collect();
        let test_rows: Vec<usize> =
            (0..table.n_rows()).filter(|&r| assignments[r] == fold).collect();
        let train = table.subset_rows(&train_rows);
        let test = table.subset_rows(&test_rows);
        let outcome =
            run_fold(spec, &train, &test, seed).map_err(|source| EvalError::Fold { fold, source })?;
        match scale {
            Scale::Euro => {
                pooled_true.extend_from_slice(test.target());
                pooled_pred.extend_from_slice(&outcome.predictions_euro);
            }
            Scale::Transformed => {
                // Pooled transformed-scale metrics would mix fold-specific
                // lambdas; pool on the euro scale instead and keep per-fold
                // reports for the transformed view.
                pooled_true.extend_from_slice(test.target());
                pooled_pred.extend_from_slice(&outcome.predictions_euro);
            }
        }
        folds.push(outcome);
    }

    let defined: Vec<f64> =
        folds.iter().filter_map(|f| f.on_scale(scale).r_squared).collect();
    let mean_r_squared = if defined.is_empty() {
        f64::NAN
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    let mean_rmse =
        folds.iter().map(|f| f.on_scale(scale).rmse).sum::<f64>() / folds.len() as f64;
    let pooled = metric_report(&pooled_true, &pooled_pred, Scale::Euro)?;
    Ok(CvResult {
        folds,
        mean_r_squared,
        mean_rmse,
        pooled,
        fold_assignments: assignments.to_vec(),
        k,
        seed,
        scale,
    })
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Gbdt,
    Forest,
}

/// Named hyperparameter axes over one model family; the grid is the
/// cartesian product in lexicographic order (first axis outermost).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub family: ModelFamily,
    pub axes: Vec<(String, Vec<f64>)>,
}

const GBDT_AXES: &[&str] =
    &["learning_rate", "n_estimators", "max_depth", "min_samples_split", "min_samples_leaf"];
const FOREST_AXES: &[&str] =
    &["n_estimators", "max_depth", "min_samples_split", "min_samples_leaf", "feature_subsample"];

impl GridSpec {
    pub fn n_points(&self) -> usize {
        self.axes.iter().map(|(_, values)| values.len()).product()
    }

    /// Materializes every grid point as `(axis settings, ModelSpec)`, in
    /// lexicographic order.
    pub fn points(&self) -> Result<Vec<(Vec<(String, f64)>, ModelSpec)>, EvalError> {
        let known: &[&str] = match self.family {
            ModelFamily::Gbdt => GBDT_AXES,
            ModelFamily::Forest => FOREST_AXES,
        };
        for (axis, values) in &self.axes {
            if !known.contains(&axis.as_str()) {
                return Err(EvalError::UnknownAxis {
                    axis: axis.clone(),
                    family: format!("{:?}", self.family),
                });
            }
            if values.is_empty() {
                return Err(EvalError::EmptyAxis(axis.clone()));
            }
        }
        let mut points = vec![Vec::new()];
        for (axis, values) in &self.axes {
            let mut extended = Vec::with_capacity(points.len() * values.len());
            for prefix in &points {
                for &value in values {
                    let mut point: Vec<(String, f64)> = prefix.clone();
                    point.push((axis.clone(), value));
                    extended.push(point);
                }
            }
            points = extended;
        }
        Ok(points.into_iter().map(|p| (p.clone(), self.materialize(&p))).collect())
    }

    fn materialize(&self, settings: &[(String, f64)]) -> ModelSpec {
        let get = |name: &str| settings.iter().find(|(a, _)| a == name).map(|(_, v)| *v);
        match self.family {
            ModelFamily::Gbdt => {
                let mut params = GbdtParams::default();
                if let Some(v) = get("learning_rate") {
                    params.learning_rate = v;
                }
                if let Some(v) = get("n_estimators") {
                    params.n_estimators = v as usize;
                }
                apply_tree_axes(&mut params.tree, &get);
                ModelSpec::Gbdt(params)
            }
            ModelFamily::Forest => {
                let mut params = ForestParams::default();
                if let Some(v) = get("n_estimators") {
                    params.n_estimators = v as usize;
                }
                if let Some(v) = get("feature_subsample") {
                    params.tree.feature_subsample = FeatureSubsample::Fraction(v);
                }
                apply_tree_axes(&mut params.tree, &get);
                ModelSpec::Forest(params)
            }
        }
    }
}

fn apply_tree_axes(tree: &mut TreeParams, get: &impl Fn(&str) -> Option<f64>) {
    if let Some(v) = get("max_depth") {
        tree.max_depth = v as usize;
    }
    if let Some(v) = get("min_samples_split") {
        tree.min_samples_split = v as usize;
    }
    if let Some(v) = get("min_samples_leaf") {
        tree.min_samples_leaf = v as usize;
    }
}

/// Which metric picks the winning grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectBy {
    MeanRSquared,
    MeanRmse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub point_index: usize,
    pub settings: Vec<(String, f64)>,
    pub spec: ModelSpec,
    pub cv: CvResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best_index: usize,
    pub best_spec: ModelSpec,
    pub best_settings: Vec<(String, f64)>,
    pub rows: Vec<GridRow>,
}

/// Exhaustive search: cross-validates every grid point on identical fold
/// assignments and returns the best by the selection metric. Ties keep the
/// earliest point in lexicographic grid order.
pub fn grid_search(
    grid: &GridSpec,
    table: &FeatureTable,
    k: usize,
    seed: u64,
    scale: Scale,
    select_by: SelectBy,
    transform_target: bool,
    impute: bool,
) -> Result<GridSearchResult, EvalError> {
    let assignments = kfold_split(table.n_rows(), k, seed)?;
    let mut rows = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for (point_index, (settings, model)) in grid.points()?.into_iter().enumerate() {
        let spec = PipelineSpec { model, transform_target, impute };
        let cv = cross_validate_with_folds(&spec, table, &assignments, k, seed, scale)?;
        let score = match select_by {
            SelectBy::MeanRSquared => cv.mean_r_squared,
            SelectBy::MeanRmse => -cv.mean_rmse,
        };
        // Strictly-better replacement keeps the first occurrence on ties.
        let improved = match best {
            None => true,
            Some((_, incumbent)) => score > incumbent,
        };
        if improved {
            best = Some((point_index, score));
        }
        rows.push(GridRow { point_index, settings, spec: spec.model, cv });
    }
    let (best_index, _) = best.expect("grid has at least one point");
    Ok(GridSearchResult {
        best_index,
        best_spec: rows[best_index].spec,
        best_settings: rows[best_index].settings.clone(),
        rows,
    })
}
