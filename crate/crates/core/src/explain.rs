//! Model explanations for tree ensembles: exact path-dependent TreeSHAP, a
//! brute-force Shapley oracle, global importance ranking, beeswarm and
//! force-plot exports, partial dependence, and SHAP dependence scatters.
//!
//! Feature perturbation is path-dependent: the conditional expectation
//! `f_S(x)` follows the split when the split feature is in `S` and otherwise
//! descends both children weighted by their cover fractions. No background
//! dataset is involved, and [`brute_force_shap`] computes the same game by
//! direct subset enumeration, which makes the fast path exactly testable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::FeatureTable;
use crate::matrix::Matrix;
use crate::transform::{inverse_one, BoxCoxParams, TransformError};
use crate::trees::{FittedModel, Node, RegressionTree};

#[derive(Debug, Error, PartialEq)]
pub enum ExplainError {
    #[error("node {node} of a tree has non-positive cover {cover}")]
    MissingCover { node: usize, cover: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{n_features} features exceed the brute-force limit of {limit}")]
    TooManyFeatures { n_features: usize, limit: usize },
    #[error("row {row} out of range ({n_rows} rows)")]
    RowOutOfRange { row: usize, n_rows: usize },
    #[error("unknown feature {feature:?}")]
    UnknownFeature { feature: String },
}

/// Maximum feature count accepted by [`brute_force_shap`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Which side of the Box-Cox transform a value lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// The model's native output scale (transformed target).
    Transformed,
    /// Original euros, via the inverse transform.
    Euro,
}

/// Per-sample, per-feature SHAP values plus the shared base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    /// Expected model output under path-dependent semantics (model scale).
    pub base_value: f64,
    /// `n_samples x n_features` SHAP values.
    pub shap_values: Matrix,
    /// The explained rows.
    pub feature_values: Matrix,
    pub feature_names: Vec<String>,
    pub row_ids: Vec<String>,
}

impl Explanation {
    pub fn n_samples(&self) -> usize {
        self.shap_values.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.shap_values.n_cols()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }
}

// ---------------------------------------------------------------------------
// Expected value
// ---------------------------------------------------------------------------

fn tree_expectation(tree: &RegressionTree, index: usize) -> Result<f64, ExplainError> {
    match &tree.nodes()[index] {
        Node::Leaf { value, cover } => {
            if *cover <= 0.0 {
                return Err(ExplainError::MissingCover { node: index, cover: *cover });
            }
            Ok(*value)
        }
        Node::Internal { left, right, cover, .. } => {
            if *cover <= 0.0 {
                return Err(ExplainError::MissingCover { node: index, cover: *cover });
            }
            let left_exp = tree_expectation(tree, *left)?;
            let right_exp = tree_expectation(tree, *right)?;
            let left_cover = tree.nodes()[*left].cover();
            let right_cover = tree.nodes()[*right].cover();
            Ok((left_cover / cover) * left_exp + (right_cover / cover) * right_exp)
        }
    }
}

/// Cover-weighted expectation of the ensemble output: per tree the recursive
/// cover-weighted mean of leaf values, combined with the ensemble's
/// intercept and tree weights.
pub fn expected_value(model: &FittedModel) -> Result<f64, ExplainError> {
    let (intercept, components) = model.ensemble_view();
    let mut total = intercept;
    for (tree, weight) in components {
        total += weight * tree_expectation(tree, 0)?;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// TreeSHAP (path-dependent)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default)]
struct PathElement {
    feature: Option<usize>,
    zero_fraction: f64,
    one_fraction: f64,
    pweight: f64,
}

fn extend_path(
    path: &mut [PathElement],
    unique_depth: usize,
    zero_fraction: f64,
    one_fraction: f64,
    feature: Option<usize>,
) {
    path[unique_depth] = PathElement {
        feature,
        zero_fraction,
        one_fraction,
        pweight: if unique_depth == 0 { 1.0 } else { 0.0 },
    };
    for i in (0..unique_depth).rev() {
        path[i + 1].pweight +=
            one_fraction * path[i].pweight * (i + 1) as f64 / (unique_depth + 1) as f64;
        path[i].pweight = zero_fraction * path[i].pweight * (unique_depth - i) as f64
            / (unique_depth + 1) as f64;
    }
}

fn unwind_path(path: &mut [PathElement], unique_depth: usize, index: usize) {
    let one_fraction = path[index].one_fraction;
    let zero_fraction = path[index].zero_fraction;
    let mut next_one_portion = path[unique_depth].pweight;
    for i in (0..unique_depth).rev() {
        if one_fraction != 0.0 {
            let tmp = path[i].pweight;
            path[i].pweight =
                next_one_portion * (unique_depth + 1) as f64 / ((i + 1) as f64 * one_fraction);
            next_one_portion = tmp
                - path[i].pweight * zero_fraction * (unique_depth - i) as f64
                    / (unique_depth + 1) as f64;
        } else {
            path[i].pweight = path[i].pweight * (unique_depth + 1) as f64
                / (zero_fraction * (unique_depth - i) as f64);
        }
    }
    for i in index..unique_depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
}

fn unwound_path_sum(path: &[PathElement], unique_depth: usize, index: usize) -> f64 {
    let one_fraction = path[index].one_fraction;
    let zero_fraction = path[index].zero_fraction;
    let mut next_one_portion = path[unique_depth].pweight;
    let mut total = 0.0;
    if one_fraction != 0.0 {
        for i in (0..unique_depth).rev() {
            let tmp = next_one_portion / ((i + 1) as f64 * one_fraction);
            total += tmp;
            next_one_portion = path[i].pweight - tmp * zero_fraction * (unique_depth - i) as f64;
        }
    } else {
        for i in (0..unique_depth).rev() {
            total += path[i].pweight / (zero_fraction * (unique_depth - i) as f64);
        }
    }
    total * (unique_depth + 1) as f64
}

#[allow(clippy::too_many_arguments)]
fn tree_shap_recurse(
    tree: &RegressionTree,
    row: &[f64],
    phi: &mut [f64],
    weight: f64,
    node_index: usize,
    path: &mut [PathElement],
    unique_depth: usize,
    parent_zero_fraction: f64,
    parent_one_fraction: f64,
    parent_feature: Option<usize>,
) {
    extend_path(path, unique_depth, parent_zero_fraction, parent_one_fraction, parent_feature);
    match &tree.nodes()[node_index] {
        Node::Leaf { value, .. } => {
            for i in 1..=unique_depth {
                let scale = unwound_path_sum(path, unique_depth, i);
                let element = &path[i];
                phi[element.feature.expect("interior path element has a feature")] +=
                    weight * scale * (element.one_fraction - element.zero_fraction) * value;
            }
        }
        Node::Internal { feature, threshold, left, right, cover, .. } => {
            let (hot, cold) =
                if row[*feature] <= *threshold { (*left, *right) } else { (*right, *left) };
            let hot_zero_fraction = tree.nodes()[hot].cover() / cover;
            let cold_zero_fraction = tree.nodes()[cold].cover() / cover;
            let mut incoming_zero_fraction = 1.0;
            let mut incoming_one_fraction = 1.0;
            let mut unique_depth = unique_depth;
            if let Some(existing) = (1..=unique_depth).find(|&i| path[i].feature == Some(*feature))
            {
                incoming_zero_fraction = path[existing].zero_fraction;
                incoming_one_fraction = path[existing].one_fraction;
                unwind_path(path, unique_depth, existing);
                unique_depth -= 1;
            }
            let (parent_path, child_path) = path.split_at_mut(unique_depth + 1);
            child_path[..parent_path.len()].copy_from_slice(parent_path);
            tree_shap_recurse(
                tree,
                row,
                phi,
                weight,
                hot,
                child_path,
                unique_depth + 1,
                hot_zero_fraction * incoming_zero_fraction,
                incoming_one_fraction,
                Some(*feature),
            );
            child_path[..parent_path.len()].copy_from_slice(parent_path);
            tree_shap_recurse(
                tree,
                row,
                phi,
                weight,
                cold,
                child_path,
                unique_depth + 1,
                cold_zero_fraction * incoming_zero_fraction,
                0.0,
                Some(*feature),
            );
        }
    }
}

fn tree_shap_single(tree: &RegressionTree, row: &[f64], phi: &mut [f64], weight: f64) {
    let depth = tree.max_depth() + 2;
    let mut path = vec![PathElement::default(); depth * (depth + 1) / 2 + depth];
    tree_shap_recurse(tree, row, phi, weight, 0, &mut path, 0, 1.0, 1.0, None);
}

/// Exact per-feature Shapley values for every row, additive across trees.
/// `base_value + sum(phi)` equals the model prediction for each row.
pub fn tree_shap(model: &FittedModel, table: &FeatureTable) -> Result<Explanation, ExplainError> {
    if table.n_features() != model.n_features() {
        return Err(ExplainError::ShapeMismatch(format!(
            "{} table features vs {} model features",
            table.n_features(),
            model.n_features()
        )));
    }
    // Walks every node, validating covers along the way.
    let base_value = expected_value(model)?;
    let (_, components) = model.ensemble_view();
    let n = table.n_rows();
    let m = table.n_features();
    let mut values = Matrix::zeros(n, m);
    let mut phi = vec![0.0; m];
    for r in 0..n {
        phi.iter_mut().for_each(|p| *p = 0.0);
        let row = table.matrix().row(r);
        for (tree, weight) in &components {
            tree_shap_single(tree, row, &mut phi, *weight);
        }
        for (c, value) in phi.iter().enumerate() {
            values.set(r, c, *value);
        }
    }
    Ok(Explanation {
        base_value,
        shap_values: values,
        feature_values: table.matrix().clone(),
        feature_names: table.feature_names().to_vec(),
        row_ids: table.row_ids().to_vec(),
    })
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

fn conditional_expectation(tree: &RegressionTree, index: usize, row: &[f64], mask: u32) -> f64 {
    match &tree.nodes()[index] {
        Node::Leaf { value, .. } => *value,
        Node::Internal { feature, threshold, left, right, cover, .. } => {
            if mask & (1 << feature) != 0 {
                let child = if row[*feature] <= *threshold { *left } else { *right };
                conditional_expectation(tree, child, row, mask)
            } else {
                let left_cover = tree.nodes()[*left].cover();
                let right_cover = tree.nodes()[*right].cover();
                (left_cover / cover) * conditional_expectation(tree, *left, row, mask)
                    + (right_cover / cover) * conditional_expectation(tree, *right, row, mask)
            }
        }
    }
}

/// The path-dependent set function `f_S(x)` for the whole ensemble, with `S`
/// encoded as a feature bitmask.
pub fn set_function(model: &FittedModel, row: &[f64], mask: u32) -> Result<f64, ExplainError> {
    let (intercept, components) = model.ensemble_view();
    let mut total = intercept;
    for (tree, weight) in components {
        tree_expectation(tree, 0)?; // cover validation
        total += weight * conditional_expectation(tree, 0, row, mask);
    }
    Ok(total)
}

/// Exact Shapley values by classic subset enumeration:
/// `phi_i = sum over S not containing i of |S|!(M-|S|-1)!/M! * (f(S+i) - f(S))`
/// under the same path-dependent `f_S` as [`tree_shap`]. Exponential in the
/// feature count; refuses more than [`BRUTE_FORCE_LIMIT`] features.
pub fn brute_force_shap(model: &FittedModel, row: &[f64]) -> Result<Vec<f64>, ExplainError> {
    let m = model.n_features();
    if m > BRUTE_FORCE_LIMIT {
        return Err(ExplainError::TooManyFeatures { n_features: m, limit: BRUTE_FORCE_LIMIT });
    }
    if row.len() != m {
        return Err(ExplainError::ShapeMismatch(format!(
            "row has {} values, model has {m} features",
            row.len()
        )));
    }
    let mut factorial = vec![1.0; m + 1];
    for i in 1..=m {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    // Cache f(S) for every subset.
    let mut f = vec![0.0; 1 << m];
    for (mask, slot) in f.iter_mut().enumerate() {
        *slot = set_function(model, row, mask as u32)?;
    }
    let mut phi = vec![0.0; m];
    for (i, phi_i) in phi.iter_mut().enumerate() {
        let bit = 1u32 << i;
        for mask in 0..(1u32 << m) {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let weight = factorial[s] * factorial[m - s - 1] / factorial[m];
            *phi_i += weight * (f[(mask | bit) as usize] - f[mask as usize]);
        }
    }
    Ok(phi)
}

// ---------------------------------------------------------------------------
// Global importance and exports
// ---------------------------------------------------------------------------

/// Mean `|SHAP|` per feature, sorted descending; equal scores order by
/// feature name.
pub fn mean_abs_importance(explanation: &Explanation) -> Vec<(String, f64)> {
    let n = explanation.n_samples().max(1);
    let mut scores: Vec<(String, f64)> = explanation
        .feature_names
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let total: f64 = (0..explanation.n_samples())
                .map(|r| explanation.shap_values.get(r, c).abs())
                .sum();
            (name.clone(), total / n as f64)
        })
        .collect();
    scores.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scores
}

/// One dot of a beeswarm export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeeswarmRow {
    pub feature: String,
    pub row_id: String,
    pub shap_value: f64,
    pub feature_value: f64,
    /// Rank of the feature value within its column: 0 at the minimum, 1 at
    /// the maximum, ties share a rank.
    pub feature_value_percentile: f64,
}

/// Long-format beeswarm data for the `top_n` features by mean `|SHAP|`.
pub fn beeswarm_data(explanation: &Explanation, top_n: usize) -> Vec<BeeswarmRow> {
    let ranked = mean_abs_importance(explanation);
    let mut rows = Vec::new();
    for (feature, _) in ranked.into_iter().take(top_n) {
        let c = explanation.feature_index(&feature).expect("ranked feature exists");
        let column = explanation.feature_values.column(c);
        for r in 0..explanation.n_samples() {
            let v = column[r];
            let less = column.iter().filter(|&&o| o < v).count();
            let greater = column.iter().filter(|&&o| o > v).count();
            let percentile =
                if less + greater == 0 { 0.5 } else { less as f64 / (less + greater) as f64 };
            rows.push(BeeswarmRow {
                feature: feature.clone(),
                row_id: explanation.row_ids[r].clone(),
                shap_value: explanation.shap_values.get(r, c),
                feature_value: v,
                feature_value_percentile: percentile,
            });
        }
    }
    rows
}

/// One additive contribution in a force plot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceEntry {
    pub feature: String,
    pub value: f64,
    pub phi: f64,
}

/// Local explanation of one row: contributions sorted by `|phi|` descending,
/// plus the base value and the prediction on both scales.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceData {
    pub row_id: String,
    pub base_value: f64,
    pub prediction_transformed: f64,
    /// Inverse Box-Cox of the transformed prediction; absent without fitted
    /// transform parameters or when the prediction leaves the transform's
    /// image (see `out_of_domain`).
    pub prediction_euro: Option<f64>,
    pub out_of_domain: bool,
    pub entries: Vec<ForceEntry>,
}

pub fn force_data(
    explanation: &Explanation,
    row: usize,
    boxcox: Option<&BoxCoxParams>,
) -> Result<ForceData, ExplainError> {
    if row >= explanation.n_samples() {
        return Err(ExplainError::RowOutOfRange { row, n_rows: explanation.n_samples() });
    }
    let mut entries: Vec<ForceEntry> = (0..explanation.n_features())
        .map(|c| ForceEntry {
            feature: explanation.feature_names[c].clone(),
            value: explanation.feature_values.get(row, c),
            phi: explanation.shap_values.get(row, c),
        })
        .filter(|e| e.phi != 0.0)
        .collect();
    entries.sort_by(|a, b| b.phi.abs().partial_cmp(&a.phi.abs()).unwrap());
    let prediction_transformed =
        explanation.base_value + entries.iter().map(|e| e.phi).sum::<f64>();
    let (prediction_euro, out_of_domain) = match boxcox {
        None => (None, false),
        Some(params) => match inverse_one(prediction_transformed, params) {
            Ok(euro) => (Some(euro), false),
            Err(_) => (None, true),
        },
    };
    Ok(ForceData {
        row_id: explanation.row_ids[row].clone(),
        base_value: explanation.base_value,
        prediction_transformed,
        prediction_euro,
        out_of_domain,
        entries,
    })
}

/// Partial dependence of the model on one feature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdpCurve {
    pub feature: String,
    /// Strictly increasing grid of feature values.
    pub grid: Vec<f64>,
    pub mean_prediction: Vec<f64>,
    pub scale: Scale,
}

impl PdpCurve {
    /// Euro-scale copy: each mean prediction pushed through the inverse
    /// transform.
    pub fn to_euro(&self, params: &BoxCoxParams) -> Result<PdpCurve, TransformError> {
        let mean_prediction = self
            .mean_prediction
            .iter()
            .map(|&p| inverse_one(p, params))
            .collect::<Result<Vec<f64>, _>>()?;
        Ok(PdpCurve {
            feature: self.feature.clone(),
            grid: self.grid.clone(),
            mean_prediction,
            scale: Scale::Euro,
        })
    }
}

/// Classic partial dependence: sweep one feature over a quantile-spaced grid
/// of its observed distinct values, substitute each grid value into every
/// row, predict, and average. Grid size shrinks to the number of distinct
/// values when the feature has fewer than `grid_size`.
pub fn pdp(
    model: &FittedModel,
    table: &FeatureTable,
    feature: &str,
    grid_size: usize,
) -> Result<PdpCurve, ExplainError> {
    let j = table
        .feature_index(feature)
        .ok_or_else(|| ExplainError::UnknownFeature { feature: feature.to_string() })?;
    if table.n_features() != model.n_features() {
        return Err(ExplainError::ShapeMismatch(format!(
            "{} table features vs {} model features",
            table.n_features(),
            model.n_features()
        )));
    }
    let grid_size = grid_size.max(2);
    let mut unique = table.column(j);
    unique.sort_by(|a, b| a.partial_cmp(b).unwrap());
    unique.dedup();
    let grid: Vec<f64> = if unique.len() <= grid_size {
        unique
    } else {
        let u = unique.len();
        (0..grid_size)
            .map(|k| {
                let idx = (k as f64 * (u - 1) as f64 / (grid_size - 1) as f64).round() as usize;
                unique[idx]
            })
            .collect()
    };

    let n = table.n_rows();
    let mut row_buf = vec![0.0; table.n_features()];
    let mean_prediction = grid
        .iter()
        .map(|&v| {
            let mut total = 0.0;
            for r in 0..n {
                row_buf.copy_from_slice(table.matrix().row(r));
                row_buf[j] = v;
                total += model.predict_row(&row_buf);
            }
            total / n as f64
        })
        .collect();
    Ok(PdpCurve { feature: feature.to_string(), grid, mean_prediction, scale: Scale::Transformed })
}

/// Per-row `(feature value, SHAP value)` scatter for one feature.
pub fn shap_dependence(
    explanation: &Explanation,
    feature: &str,
) -> Result<Vec<(f64, f64)>, ExplainError> {
    let c = explanation
        .feature_index(feature)
        .ok_or_else(|| ExplainError::UnknownFeature { feature: feature.to_string() })?;
    Ok((0..explanation.n_samples())
        .map(|r| (explanation.feature_values.get(r, c), explanation.shap_values.get(r, c)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureTable;
    use crate::trees::{
        fit_gbdt, FeatureSubsample, GbdtModel, GbdtParams, Node, RandomForestModel,
        RegressionTree, TreeParams,
    };
    use approx::assert_relative_eq;

    fn depth1_tree() -> RegressionTree {
        RegressionTree::from_nodes(
            vec![
                Node::Internal {
                    feature: 0,
                    threshold: 0.0,
                    left: 1,
                    right: 2,
                    cover: 100.0,
                    gain: 1.0,
                },
                Node::Leaf { value: 2.0, cover: 50.0 },
                Node::Leaf { value: 4.0, cover: 50.0 },
            ],
            3,
        )
        .unwrap()
    }

    fn forest_of(trees: Vec<RegressionTree>, n_features: usize) -> FittedModel {
        let n = trees.len();
        FittedModel::Forest(RandomForestModel {
            trees,
            n_estimators: n,
            bootstrap: false,
            seed: 0,
            n_features,
        })
    }

    fn table_from(matrix: Matrix, names: &[&str]) -> FeatureTable {
        let n = matrix.n_rows();
        FeatureTable::new(
            names.iter().map(|s| s.to_string()).collect(),
            matrix,
            vec![0.0; n],
            (0..n).map(|i| format!("r{i}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn expected_value_balanced_split() {
        let model = forest_of(vec![depth1_tree()], 3);
        assert_relative_eq!(expected_value(&model).unwrap(), 3.0);
    }

    #[test]
    fn expected_value_single_leaf_with_offsets() {
        let leaf =
            RegressionTree::from_nodes(vec![Node::Leaf { value: 5.0, cover: 10.0 }], 2).unwrap();
        let model = FittedModel::Gbdt(GbdtModel {
            base_score: 1.5,
            learning_rate: 0.5,
            trees: vec![leaf],
            n_estimators: 1,
            n_features: 2,
            training_sse: vec![],
        });
        assert_relative_eq!(expected_value(&model).unwrap(), 1.5 + 0.5 * 5.0);
    }

    #[test]
    fn expected_value_matches_training_mean_prediction() {
        let x = Matrix::from_rows(
            &(0..60)
                .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.61).cos(), i as f64 % 4.0])
                .collect::<Vec<_>>(),
        );
        let y: Vec<f64> =
            (0..60).map(|i| (i as f64 * 0.21).sin() * 4.0 + i as f64 * 0.1).collect();
        let params = GbdtParams {
            learning_rate: 0.3,
            n_estimators: 20,
            tree: TreeParams {
                max_depth: 3,
                min_samples_split: 2,
                min_samples_leaf: 1,
                feature_subsample: FeatureSubsample::All,
            },
        };
        let model = FittedModel::Gbdt(fit_gbdt(&x, &y, &params, 4).unwrap());
        let mean_prediction =
            (0..x.n_rows()).map(|r| model.predict_row(x.row(r))).sum::<f64>() / x.n_rows() as f64;
        assert_relative_eq!(expected_value(&model).unwrap(), mean_prediction, epsilon = 1e-8);
    }

    #[test]
    fn single_leaf_ensemble_has_zero_shap() {
        let leaf =
            RegressionTree::from_nodes(vec![Node::Leaf { value: 7.0, cover: 3.0 }], 2).unwrap();
        let model = forest_of(vec![leaf], 2);
        let table = table_from(Matrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5]]), &["a", "b"]);
        let explanation = tree_shap(&model, &table).unwrap();
        assert_relative_eq!(explanation.base_value, 7.0);
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(explanation.shap_values.get(r, c), 0.0);
            }
        }
    }

    #[test]
    fn depth1_right_routed_row_gets_phi_one() {
        let model = forest_of(vec![depth1_tree()], 3);
        let table = table_from(Matrix::from_rows(&[vec![1.0, 9.0, -3.0]]), &["a", "b", "c"]);
        let explanation = tree_shap(&model, &table).unwrap();
        assert_relative_eq!(explanation.base_value, 3.0);
        assert_relative_eq!(explanation.shap_values.get(0, 0), 1.0, epsilon = 1e-12);
        assert_eq!(explanation.shap_values.get(0, 1), 0.0);
        assert_eq!(explanation.shap_values.get(0, 2), 0.0);

        let brute = brute_force_shap(&model, table.matrix().row(0)).unwrap();
        assert_relative_eq!(brute[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(brute[1], 0.0);
    }

    #[test]
    fn local_accuracy_on_fitted_ensemble() {
        let x = Matrix::from_rows(
            &(0..40)
                .map(|i| {
                    vec![(i as f64 * 0.7).sin(), (i as f64 * 0.3).cos(), (i % 5) as f64, i as f64]
                })
                .collect::<Vec<_>>(),
        );
        let y: Vec<f64> =
            (0..40).map(|i| (i as f64 * 0.13).cos() * 3.0 + (i % 7) as f64).collect();
        let params = GbdtParams {
            learning_rate: 0.2,
            n_estimators: 25,
            tree: TreeParams {
                max_depth: 3,
                min_samples_split: 2,
                min_samples_leaf: 1,
                feature_subsample: FeatureSubsample::All,
            },
        };
        let model = FittedModel::Gbdt(fit_gbdt(&x, &y, &params, 8).unwrap());
        let table = table_from(x.clone(), &["a", "b", "c", "d"]);
        let explanation = tree_shap(&model, &table).unwrap();
        for r in 0..x.n_rows() {
            let sum: f64 = (0..4).map(|c| explanation.shap_values.get(r, c)).sum();
            let prediction = model.predict_row(x.row(r));
            assert!(
                (explanation.base_value + sum - prediction).abs() < 1e-8,
                "local accuracy violated at row {r}"
            );
        }
    }

    #[test]
    fn dummy_feature_has_zero_phi() {
        // Features 1 and 2 appear in no split.
        let model = forest_of(vec![depth1_tree()], 3);
        let table = table_from(
            Matrix::from_rows(&[vec![-2.0, 100.0, 3.0], vec![5.0, -100.0, 0.1]]),
            &["a", "b", "c"],
        );
        let explanation = tree_shap(&model, &table).unwrap();
        for r in 0..2 {
            assert_eq!(explanation.shap_values.get(r, 1), 0.0);
            assert_eq!(explanation.shap_values.get(r, 2), 0.0);
        }
    }

    #[test]
    fn shapley_axioms_on_brute_force() {
        // Symmetric tree: features 0 and 1 act identically on this row.
        let tree = RegressionTree::from_nodes(
            vec![
                Node::Internal {
                    feature: 0,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                    cover: 8.0,
                    gain: 1.0,
                },
                Node::Internal {
                    feature: 1,
                    threshold: 0.5,
                    left: 3,
                    right: 4,
                    cover: 4.0,
                    gain: 1.0,
                },
                Node::Internal {
                    feature: 1,
                    threshold: 0.5,
                    left: 5,
                    right: 6,
                    cover: 4.0,
                    gain: 1.0,
                },
                Node::Leaf { value: 0.0, cover: 2.0 },
                Node::Leaf { value: 1.0, cover: 2.0 },
                Node::Leaf { value: 1.0, cover: 2.0 },
                Node::Leaf { value: 2.0, cover: 2.0 },
            ],
            2,
        )
        .unwrap();
        let model = forest_of(vec![tree], 2);
        let phi = brute_force_shap(&model, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(phi[0], phi[1], epsilon = 1e-12);

        // Efficiency: sum(phi) = f(all) - f(empty).
        let full = set_function(&model, &[1.0, 1.0], 0b11).unwrap();
        let empty = set_function(&model, &[1.0, 1.0], 0).unwrap();
        assert_relative_eq!(phi[0] + phi[1], full - empty, epsilon = 1e-12);

        // Single split feature: phi_0 = f({0}) - f(empty).
        let single = forest_of(vec![depth1_tree()], 3);
        let row = [5.0, 0.0, 0.0];
        let phi = brute_force_shap(&single, &row).unwrap();
        let with = set_function(&single, &row, 0b001).unwrap();
        let without = set_function(&single, &row, 0).unwrap();
        assert_relative_eq!(phi[0], with - without, epsilon = 1e-12);
    }

    #[test]
    fn brute_force_rejects_too_many_features() {
        let leaf =
            RegressionTree::from_nodes(vec![Node::Leaf { value: 1.0, cover: 1.0 }], 13).unwrap();
        let model = forest_of(vec![leaf], 13);
        let row = vec![0.0; 13];
        assert!(matches!(
            brute_force_shap(&model, &row),
            Err(ExplainError::TooManyFeatures { n_features: 13, limit: 12 })
        ));
    }

    #[test]
    fn additivity_across_trees() {
        let x = Matrix::from_rows(
            &(0..30).map(|i| vec![(i as f64 * 0.9).sin(), (i % 4) as f64]).collect::<Vec<_>>(),
        );
        let y: Vec<f64> = (0..30).map(|i| i as f64 * 0.3).collect();
        let params = GbdtParams {
            learning_rate: 0.4,
            n_estimators: 2,
            tree: TreeParams {
                max_depth: 2,
                min_samples_split: 2,
                min_samples_leaf: 1,
                feature_subsample: FeatureSubsample::All,
            },
        };
        let model = fit_gbdt(&x, &y, &params, 3).unwrap();
        let table = table_from(x.clone(), &["a", "b"]);

        let both = tree_shap(&FittedModel::Gbdt(model.clone()), &table).unwrap();
        let first = FittedModel::Gbdt(GbdtModel {
            trees: vec![model.trees[0].clone()],
            training_sse: vec![],
            n_estimators: 1,
            ..model.clone()
        });
        let second = FittedModel::Gbdt(GbdtModel {
            trees: vec![model.trees[1].clone()],
            training_sse: vec![],
            n_estimators: 1,
            base_score: 0.0,
            ..model.clone()
        });
        let phi_first = tree_shap(&first, &table).unwrap();
        let phi_second = tree_shap(&second, &table).unwrap();
        for r in 0..table.n_rows() {
            for c in 0..2 {
                assert_relative_eq!(
                    both.shap_values.get(r, c),
                    phi_first.shap_values.get(r, c) + phi_second.shap_values.get(r, c),
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn importance_ranking_rules() {
        let explanation = Explanation {
            base_value: 0.0,
            shap_values: Matrix::from_rows(&[
                vec![1.0, 0.0, -2.0],
                vec![-1.0, 0.0, 2.0],
                vec![1.0, 0.0, -2.0],
            ]),
            feature_values: Matrix::zeros(3, 3),
            feature_names: vec!["b".into(), "c".into(), "a".into()],
            row_ids: vec!["r0".into(), "r1".into(), "r2".into()],
        };
        let ranked = mean_abs_importance(&explanation);
        assert_eq!(ranked[0].0, "a");
        assert_relative_eq!(ranked[0].1, 2.0);
        assert_eq!(ranked[1].0, "b");
        assert_eq!(ranked[2].0, "c");
        assert_relative_eq!(ranked[2].1, 0.0);

        // All-zero matrix: scores all zero, names ordered.
        let zero = Explanation { shap_values: Matrix::zeros(3, 3), ..explanation.clone() };
        let ranked = mean_abs_importance(&zero);
        assert!(ranked.iter().all(|(_, s)| *s == 0.0));
        assert_eq!(ranked[0].0, "a");
    }

    #[test]
    fn beeswarm_rows_and_percentiles() {
        let explanation = Explanation {
            base_value: 0.0,
            shap_values: Matrix::from_rows(&[vec![1.0, 0.1], vec![2.0, 0.2], vec![3.0, 0.3]]),
            feature_values: Matrix::from_rows(&[vec![5.0, 9.0], vec![7.0, 9.0], vec![6.0, 9.0]]),
            feature_names: vec!["big".into(), "small".into()],
            row_ids: vec!["r0".into(), "r1".into(), "r2".into()],
        };
        let top1 = beeswarm_data(&explanation, 1);
        assert_eq!(top1.len(), 3);
        assert!(top1.iter().all(|r| r.feature == "big"));
        let p: Vec<f64> = top1.iter().map(|r| r.feature_value_percentile).collect();
        assert_eq!(p, vec![0.0, 1.0, 0.5]);

        let both = beeswarm_data(&explanation, 5);
        assert_eq!(both.len(), 3 * 2);
        // Constant feature: all ranks at the midpoint.
        assert!(both
            .iter()
            .filter(|r| r.feature == "small")
            .all(|r| r.feature_value_percentile == 0.5));
    }

    #[test]
    fn force_data_sums_and_filters() {
        let model = forest_of(vec![depth1_tree()], 3);
        let table = table_from(Matrix::from_rows(&[vec![1.0, 4.0, 5.0]]), &["a", "b", "c"]);
        let explanation = tree_shap(&model, &table).unwrap();
        let params = BoxCoxParams { lambda: 0.0, shift: 0.0, log_likelihood: 0.0 };
        let force = force_data(&explanation, 0, Some(&params)).unwrap();
        // Zero contributions are filtered; only feature 0 moved.
        assert_eq!(force.entries.len(), 1);
        assert_eq!(force.entries[0].feature, "a");
        assert_relative_eq!(
            force.base_value + force.entries.iter().map(|e| e.phi).sum::<f64>(),
            force.prediction_transformed,
            epsilon = 1e-12
        );
        assert_relative_eq!(force.prediction_euro.unwrap(), force.prediction_transformed.exp());
        assert!(!force.out_of_domain);

        assert!(matches!(
            force_data(&explanation, 9, None),
            Err(ExplainError::RowOutOfRange { row: 9, n_rows: 1 })
        ));
    }

    #[test]
    fn force_data_flags_out_of_domain() {
        let leaf =
            RegressionTree::from_nodes(vec![Node::Leaf { value: -9.0, cover: 2.0 }], 1).unwrap();
        let model = forest_of(vec![leaf], 1);
        let table = table_from(Matrix::from_rows(&[vec![0.0]]), &["a"]);
        let explanation = tree_shap(&model, &table).unwrap();
        let params = BoxCoxParams { lambda: 0.5, shift: 0.0, log_likelihood: 0.0 };
        let force = force_data(&explanation, 0, Some(&params)).unwrap();
        assert!(force.out_of_domain);
        assert_eq!(force.prediction_euro, None);
    }

    #[test]
    fn pdp_flat_for_ignored_feature_and_steps_for_used_one() {
        let model = forest_of(vec![depth1_tree()], 3);
        let rows: Vec<Vec<f64>> =
            (0..10).map(|i| vec![i as f64 - 5.0, i as f64, (i % 3) as f64]).collect();
        let table = table_from(Matrix::from_rows(&rows), &["a", "b", "c"]);

        // Ignored feature: flat at the mean prediction.
        let curve = pdp(&model, &table, "b", 5).unwrap();
        let mean_prediction: f64 =
            rows.iter().map(|r| model.predict_row(r)).sum::<f64>() / rows.len() as f64;
        for v in &curve.mean_prediction {
            assert_relative_eq!(*v, mean_prediction, epsilon = 1e-12);
        }

        // Split feature: a step function stepping at the threshold between
        // the two leaf values (every row follows the substituted value).
        let curve = pdp(&model, &table, "a", 4).unwrap();
        for (g, p) in curve.grid.iter().zip(&curve.mean_prediction) {
            let expected = if *g <= 0.0 { 2.0 } else { 4.0 };
            assert_relative_eq!(*p, expected, epsilon = 1e-12);
        }
        assert!(curve.grid.windows(2).all(|w| w[0] < w[1]));

        assert!(matches!(
            pdp(&model, &table, "nope", 4),
            Err(ExplainError::UnknownFeature { .. })
        ));
    }

    #[test]
    fn pdp_grid_size_honored_with_enough_distinct_values() {
        let model = forest_of(vec![depth1_tree()], 3);
        let rows: Vec<Vec<f64>> =
            (0..200).map(|i| vec![i as f64 * 0.31 - 30.0, i as f64, 0.0]).collect();
        let table = table_from(Matrix::from_rows(&rows), &["a", "b", "c"]);
        let curve = pdp(&model, &table, "a", 50).unwrap();
        assert_eq!(curve.grid.len(), 50);
        assert_eq!(curve.mean_prediction.len(), 50);
        assert!(curve.grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn dependence_scatter_shape() {
        let model = forest_of(vec![depth1_tree()], 3);
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 - 3.0, 1.0, 2.0]).collect();
        let table = table_from(Matrix::from_rows(&rows), &["a", "b", "c"]);
        let explanation = tree_shap(&model, &table).unwrap();
        let points = shap_dependence(&explanation, "a").unwrap();
        assert_eq!(points.len(), 6);
        // Ignored feature: all SHAP values zero.
        let flat = shap_dependence(&explanation, "b").unwrap();
        assert!(flat.iter().all(|(_, phi)| *phi == 0.0));
    }
}
