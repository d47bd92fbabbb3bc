//! CART regression trees, random-forest bagging, and gradient-boosted
//! decision trees with squared-error loss.
//!
//! Trees are stored as index-based node arenas (root at index 0). Every node
//! carries its training `cover` (the number of training rows, counted with
//! bootstrap multiplicity, that reached it); the explain module's
//! conditional expectations depend on it. Split finding is greedy variance
//! reduction over midpoint thresholds between consecutive distinct sorted
//! feature values, with rows routed left on `value <= threshold`.
//!
//! Determinism: for a fixed `(data, params, seed)` the fitted model is
//! bit-identical across runs. Candidate splits are scanned in ascending
//! `(feature, threshold)` order and compared through [`better_candidate`],
//! whose tie rule is part of the model contract.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derive_seed;
use crate::matrix::Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum TreesError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty training set")]
    EmptyTraining,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
}

/// One node of a regression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Training rows (with multiplicity) that reached this node.
        cover: f64,
        /// Squared-error reduction achieved by this split.
        gain: f64,
    },
    Leaf {
        value: f64,
        cover: f64,
    },
}

impl Node {
    pub fn cover(&self) -> f64 {
        match self {
            Node::Internal { cover, .. } | Node::Leaf { cover, .. } => *cover,
        }
    }
}

/// A fitted CART regression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    n_features: usize,
}

impl RegressionTree {
    /// Builds a tree from an explicit node arena (root at index 0),
    /// validating child indices and cover bookkeeping.
    pub fn from_nodes(nodes: Vec<Node>, n_features: usize) -> Result<Self, TreesError> {
        if nodes.is_empty() {
            return Err(TreesError::InvalidTree("no nodes".to_string()));
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.cover() <= 0.0 {
                return Err(TreesError::InvalidTree(format!(
                    "node {i} has cover {}",
                    node.cover()
                )));
            }
            if let Node::Internal { feature, left, right, cover, .. } = node {
                if *left >= nodes.len() || *right >= nodes.len() {
                    return Err(TreesError::InvalidTree(format!("node {i} child out of range")));
                }
                if *feature >= n_features {
                    return Err(TreesError::InvalidTree(format!(
                        "node {i} splits on feature {feature} of {n_features}"
                    )));
                }
                let child_sum = nodes[*left].cover() + nodes[*right].cover();
                if (child_sum - cover).abs() > 1e-6 * cover.max(1.0) {
                    return Err(TreesError::InvalidTree(format!(
                        "node {i} cover {cover} != child sum {child_sum}"
                    )));
                }
            }
        }
        Ok(Self { nodes, n_features })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn max_depth(&self) -> usize {
        fn depth(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => {
                    1 + depth(nodes, *left).max(depth(nodes, *right))
                }
            }
        }
        depth(&self.nodes, 0)
    }

    /// Routes a row from the root to a leaf; `value <= threshold` goes left.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.nodes[self.leaf_index(row)] {
            Node::Leaf { value, .. } => *value,
            Node::Internal { .. } => unreachable!(),
        }
    }

    /// Index of the leaf a row routes to.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Internal { feature, threshold, left, right, .. } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Sums split gains into `acc`, one slot per feature.
    pub fn accumulate_gain(&self, acc: &mut [f64]) {
        for node in &self.nodes {
            if let Node::Internal { feature, gain, .. } = node {
                acc[*feature] += gain;
            }
        }
    }
}

/// How many features each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubsample {
    /// Every feature (the GBDT default).
    All,
    /// `ceil(sqrt(M))` features (the forest default).
    Sqrt,
    /// `ceil(fraction * M)` features, `0 < fraction <= 1`.
    Fraction(f64),
}

impl FeatureSubsample {
    pub fn count(&self, n_features: usize) -> usize {
        let k = match self {
            FeatureSubsample::All => n_features,
            FeatureSubsample::Sqrt => (n_features as f64).sqrt().ceil() as usize,
            FeatureSubsample::Fraction(f) => {
                let raw = f * n_features as f64;
                // Snap near-integers so fraction = k/M selects exactly k.
                if (raw - raw.round()).abs() < 1e-9 {
                    raw.round() as usize
                } else {
                    raw.ceil() as usize
                }
            }
        };
        k.clamp(1, n_features)
    }

    fn validate(&self) -> Result<(), TreesError> {
        if let FeatureSubsample::Fraction(f) = self {
            if !(*f > 0.0 && *f <= 1.0) {
                return Err(TreesError::InvalidParams(format!(
                    "feature_subsample fraction {f} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Growth limits for a single tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub feature_subsample: FeatureSubsample,
}

impl TreeParams {
    /// Per-tree limits used inside the default GBDT configuration.
    pub fn gbdt_default() -> Self {
        Self {
            max_depth: 3,
            min_samples_split: 2,
            min_samples_leaf: 1,
            feature_subsample: FeatureSubsample::All,
        }
    }

    /// Per-tree limits used inside the default random-forest configuration.
    pub fn forest_default() -> Self {
        Self {
            max_depth: 15,
            min_samples_split: 3,
            min_samples_leaf: 3,
            feature_subsample: FeatureSubsample::Sqrt,
        }
    }

    fn validate(&self) -> Result<(), TreesError> {
        if self.min_samples_leaf < 1 {
            return Err(TreesError::InvalidParams("min_samples_leaf must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(TreesError::InvalidParams("min_samples_split must be >= 2".into()));
        }
        self.feature_subsample.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_estimators: 700, bootstrap: true, tree: TreeParams::forest_default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub tree: TreeParams,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self { learning_rate: 0.1, n_estimators: 900, tree: TreeParams::gbdt_default() }
    }
}

/// A bagged ensemble; prediction is the unweighted mean over trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub trees: Vec<RegressionTree>,
    pub n_estimators: usize,
    pub bootstrap: bool,
    pub seed: u64,
    pub n_features: usize,
}

impl RandomForestModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        sum / self.trees.len() as f64
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>, TreesError> {
        check_width(x, self.n_features)?;
        Ok((0..x.n_rows()).map(|r| self.predict_row(x.row(r))).collect())
    }
}

/// A boosted ensemble; prediction is
/// `base_score + learning_rate * sum(tree outputs)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
    pub n_estimators: usize,
    pub n_features: usize,
    /// Training SSE after each boosting iteration; non-increasing.
    pub training_sse: Vec<f64>,
}

impl GbdtModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        self.base_score + self.learning_rate * sum
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>, TreesError> {
        check_width(x, self.n_features)?;
        Ok((0..x.n_rows()).map(|r| self.predict_row(x.row(r))).collect())
    }
}

/// A fitted tree ensemble of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FittedModel {
    Gbdt(GbdtModel),
    Forest(RandomForestModel),
}

impl FittedModel {
    pub fn n_features(&self) -> usize {
        match self {
            FittedModel::Gbdt(m) => m.n_features,
            FittedModel::Forest(m) => m.n_features,
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            FittedModel::Gbdt(m) => m.predict_row(row),
            FittedModel::Forest(m) => m.predict_row(row),
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>, TreesError> {
        match self {
            FittedModel::Gbdt(m) => m.predict(x),
            FittedModel::Forest(m) => m.predict(x),
        }
    }

    /// The ensemble as `intercept + sum(weight * tree)`: GBDT trees carry the
    /// learning rate, forest trees carry `1 / n_trees`.
    pub fn ensemble_view(&self) -> (f64, Vec<(&RegressionTree, f64)>) {
        match self {
            FittedModel::Gbdt(m) => {
                (m.base_score, m.trees.iter().map(|t| (t, m.learning_rate)).collect())
            }
            FittedModel::Forest(m) => {
                let w = 1.0 / m.trees.len() as f64;
                (0.0, m.trees.iter().map(|t| (t, w)).collect())
            }
        }
    }

    /// Total squared-error reduction per feature, summed over every split of
    /// every tree. Features never split on score 0.
    pub fn gain_importance(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_features()];
        let trees = match self {
            FittedModel::Gbdt(m) => &m.trees,
            FittedModel::Forest(m) => &m.trees,
        };
        for tree in trees {
            tree.accumulate_gain(&mut acc);
        }
        acc
    }
}

/// Hyperparameters plus model family; what tuning searches over and Boruta
/// fits internally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Gbdt(GbdtParams),
    Forest(ForestParams),
}

impl ModelSpec {
    pub fn fit(&self, x: &Matrix, y: &[f64], seed: u64) -> Result<FittedModel, TreesError> {
        match self {
            ModelSpec::Gbdt(params) => Ok(FittedModel::Gbdt(fit_gbdt(x, y, params, seed)?)),
            ModelSpec::Forest(params) => Ok(FittedModel::Forest(fit_forest(x, y, params, seed)?)),
        }
    }
}

// ---------------------------------------------------------------------------
// Split finding
// ---------------------------------------------------------------------------

/// Candidates whose gains differ by less than this (relative to the larger
/// gain) are treated as tied and resolved by `(feature, threshold)` order.
pub const GAIN_TIE_REL_TOL: f64 = 1e-9;

/// A node stops splitting when its best gain does not exceed this fraction
/// of the node SSE; mathematically-zero gains round to tiny values either
/// side of zero.
pub const GAIN_ZERO_REL_FLOOR: f64 = 1e-12;

/// One candidate split of a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// The split selection rule: strictly larger gain wins (beyond the tie
/// tolerance); ties resolve to the lowest feature index, then the lowest
/// threshold. Scanning candidates in ascending `(feature, threshold)` order
/// with this predicate yields the documented deterministic choice.
pub fn better_candidate(new: &SplitCandidate, best: &Option<SplitCandidate>) -> bool {
    match best {
        None => true,
        Some(b) => {
            let tol = GAIN_TIE_REL_TOL * new.gain.abs().max(b.gain.abs());
            if new.gain > b.gain + tol {
                true
            } else if b.gain > new.gain + tol {
                false
            } else {
                new.feature < b.feature
                    || (new.feature == b.feature && new.threshold < b.threshold)
            }
        }
    }
}

struct TreeBuilder<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    params: &'a TreeParams,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn build(&mut self, rows: &[usize], depth: usize) -> usize {
        let n = rows.len();
        let cover = n as f64;
        let sum: f64 = rows.iter().map(|&r| self.y[r]).sum();
        let mean = sum / cover;

        let splittable = depth < self.params.max_depth
            && n >= self.params.min_samples_split
            && n >= 2 * self.params.min_samples_leaf;
        if !splittable {
            return self.push_leaf(mean, cover);
        }

        // Center targets at the node mean; keeps the prefix-sum gain
        // arithmetic well conditioned for large-magnitude targets.
        let centered: Vec<f64> = rows.iter().map(|&r| self.y[r] - mean).collect();
        let sse: f64 = centered.iter().map(|c| c * c).sum();
        if sse <= 0.0 {
            return self.push_leaf(mean, cover);
        }

        let features = self.candidate_features();
        let best = find_best_split(
            self.x,
            rows,
            &centered,
            sse,
            &features,
            self.params.min_samples_leaf,
        );
        let best = match best {
            Some(c) if c.gain > GAIN_ZERO_REL_FLOOR * sse => c,
            _ => return self.push_leaf(mean, cover),
        };

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| self.x.get(r, best.feature) <= best.threshold);
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());

        let index = self.nodes.len();
        // Placeholder; replaced once children are built.
        self.nodes.push(Node::Leaf { value: mean, cover });
        let left = self.build(&left_rows, depth + 1);
        let right = self.build(&right_rows, depth + 1);
        self.nodes[index] = Node::Internal {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
            cover,
            gain: best.gain,
        };
        index
    }

    fn push_leaf(&mut self, value: f64, cover: f64) -> usize {
        self.nodes.push(Node::Leaf { value, cover });
        self.nodes.len() - 1
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let m = self.x.n_cols();
        let k = self.params.feature_subsample.count(m);
        if k == m {
            (0..m).collect()
        } else {
            let mut picked = rand::seq::index::sample(&mut self.rng, m, k).into_vec();
            picked.sort_unstable();
            picked
        }
    }
}

fn find_best_split(
    x: &Matrix,
    rows: &[usize],
    centered: &[f64],
    sse: f64,
    features: &[usize],
    min_samples_leaf: usize,
) -> Option<SplitCandidate> {
    let n = rows.len();
    let total_sum: f64 = centered.iter().sum();
    let mut best: Option<SplitCandidate> = None;
    let mut order: Vec<usize> = Vec::with_capacity(n);

    for &feature in features {
        order.clear();
        order.extend(0..n);
        // Sort by (value, position) so tied feature values keep a fixed
        // summation order.
        order.sort_unstable_by(|&a, &b| {
            x.get(rows[a], feature)
                .partial_cmp(&x.get(rows[b], feature))
                .expect("NaN feature value in split search")
                .then(a.cmp(&b))
        });

        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for i in 0..n - 1 {
            let c = centered[order[i]];
            left_sum += c;
            left_sq += c * c;
            let v = x.get(rows[order[i]], feature);
            let v_next = x.get(rows[order[i + 1]], feature);
            if v == v_next {
                continue;
            }
            let n_left = i + 1;
            let n_right = n - n_left;
            if n_left < min_samples_leaf || n_right < min_samples_leaf {
                continue;
            }
            let right_sum = total_sum - left_sum;
            let right_sq = sse - left_sq;
            let sse_left = left_sq - left_sum * left_sum / n_left as f64;
            let sse_right = right_sq - right_sum * right_sum / n_right as f64;
            let gain = sse - sse_left - sse_right;
            let mut threshold = 0.5 * (v + v_next);
            // Adjacent floats can round the midpoint onto v_next, which
            // would route v_next left; pin to v instead.
            if threshold >= v_next {
                threshold = v;
            }
            let candidate = SplitCandidate { feature, threshold, gain };
            if better_candidate(&candidate, &best) {
                best = Some(candidate);
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

fn check_shapes(x: &Matrix, y: &[f64]) -> Result<(), TreesError> {
    if x.n_rows() != y.len() {
        return Err(TreesError::ShapeMismatch(format!(
            "{} rows vs {} targets",
            x.n_rows(),
            y.len()
        )));
    }
    if x.n_rows() == 0 {
        return Err(TreesError::EmptyTraining);
    }
    if x.has_nan() || y.iter().any(|v| !v.is_finite()) {
        return Err(TreesError::ShapeMismatch("non-finite cell in training data".into()));
    }
    Ok(())
}

fn check_width(x: &Matrix, n_features: usize) -> Result<(), TreesError> {
    if x.n_cols() != n_features {
        return Err(TreesError::ShapeMismatch(format!(
            "{} columns vs {} model features",
            x.n_cols(),
            n_features
        )));
    }
    Ok(())
}

/// Fits a single CART regression tree on all rows.
pub fn fit_tree(
    x: &Matrix,
    y: &[f64],
    params: &TreeParams,
    seed: u64,
) -> Result<RegressionTree, TreesError> {
    check_shapes(x, y)?;
    params.validate()?;
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    Ok(fit_tree_on_rows(x, y, params, ChaCha8Rng::seed_from_u64(seed), &rows))
}

fn fit_tree_on_rows(
    x: &Matrix,
    y: &[f64],
    params: &TreeParams,
    rng: ChaCha8Rng,
    rows: &[usize],
) -> RegressionTree {
    let mut builder = TreeBuilder { x, y, params, rng, nodes: Vec::new() };
    builder.build(rows, 0);
    RegressionTree { nodes: builder.nodes, n_features: x.n_cols() }
}

/// Fits a random forest: each tree trains on a bootstrap resample (with
/// replacement, original size) with per-split feature subsampling.
pub fn fit_forest(
    x: &Matrix,
    y: &[f64],
    params: &ForestParams,
    seed: u64,
) -> Result<RandomForestModel, TreesError> {
    check_shapes(x, y)?;
    params.tree.validate()?;
    if params.n_estimators == 0 {
        return Err(TreesError::InvalidParams("n_estimators must be >= 1".into()));
    }
    let n = x.n_rows();
    let mut trees = Vec::with_capacity(params.n_estimators);
    for i in 0..params.n_estimators {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
        let rows: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        trees.push(fit_tree_on_rows(x, y, &params.tree, rng, &rows));
    }
    Ok(RandomForestModel {
        trees,
        n_estimators: params.n_estimators,
        bootstrap: params.bootstrap,
        seed,
        n_features: x.n_cols(),
    })
}

/// Fits a gradient-boosted ensemble: `F_0 = mean(y)`, then each tree fits
/// the residuals of the running prediction and joins scaled by the learning
/// rate. Training SSE is recorded per iteration.
pub fn fit_gbdt(
    x: &Matrix,
    y: &[f64],
    params: &GbdtParams,
    seed: u64,
) -> Result<GbdtModel, TreesError> {
    check_shapes(x, y)?;
    params.tree.validate()?;
    if params.learning_rate <= 0.0 {
        return Err(TreesError::InvalidParams("learning_rate must be > 0".into()));
    }
    let n = x.n_rows();
    let rows: Vec<usize> = (0..n).collect();
    let base_score = y.iter().sum::<f64>() / n as f64;
    let mut prediction = vec![base_score; n];
    let mut residuals = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_estimators);
    let mut training_sse = Vec::with_capacity(params.n_estimators);

    for k in 0..params.n_estimators {
        for i in 0..n {
            residuals[i] = y[i] - prediction[i];
        }
        let rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k as u64));
        let tree = fit_tree_on_rows(x, &residuals, &params.tree, rng, &rows);
        for i in 0..n {
            prediction[i] += params.learning_rate * tree.predict_row(x.row(i));
        }
        training_sse
            .push((0..n).map(|i| (y[i] - prediction[i]) * (y[i] - prediction[i])).sum::<f64>());
        trees.push(tree);
    }
    Ok(GbdtModel {
        base_score,
        learning_rate: params.learning_rate,
        trees,
        n_estimators: params.n_estimators,
        n_features: x.n_cols(),
        training_sse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_column(values: &[f64]) -> Matrix {
        Matrix::from_flat(values.to_vec(), values.len(), 1)
    }

    fn plain_params(max_depth: usize) -> TreeParams {
        TreeParams {
            max_depth,
            min_samples_split: 2,
            min_samples_leaf: 1,
            feature_subsample: FeatureSubsample::All,
        }
    }

    #[test]
    fn perfectly_separable_target_splits_once() {
        let x = single_column(&[1.0, 2.0, 3.0, 4.0]);
        let y = [5.0, 5.0, 9.0, 9.0];
        let tree = fit_tree(&x, &y, &plain_params(4), 0).unwrap();
        match &tree.nodes()[0] {
            Node::Internal { feature, threshold, gain, .. } => {
                assert_eq!(*feature, 0);
                assert_relative_eq!(*threshold, 2.5);
                assert_relative_eq!(*gain, 16.0); // SSE drops from 16 to 0
            }
            other => panic!("expected a split at the root, got {other:?}"),
        }
        assert_eq!(tree.n_leaves(), 2);
        for (i, expected) in y.iter().enumerate() {
            assert_relative_eq!(tree.predict_row(x.row(i)), *expected);
        }
    }

    #[test]
    fn depth_zero_is_a_single_mean_leaf() {
        let x = single_column(&[1.0, 2.0, 3.0]);
        let y = [1.0, 2.0, 6.0];
        let tree = fit_tree(&x, &y, &plain_params(0), 0).unwrap();
        assert_eq!(tree.nodes().len(), 1);
        assert_relative_eq!(tree.predict_row(&[99.0]), 3.0);
    }

    #[test]
    fn value_equal_to_threshold_routes_left() {
        let nodes = vec![
            Node::Internal { feature: 0, threshold: 2.0, left: 1, right: 2, cover: 4.0, gain: 1.0 },
            Node::Leaf { value: -1.0, cover: 2.0 },
            Node::Leaf { value: 1.0, cover: 2.0 },
        ];
        let tree = RegressionTree::from_nodes(nodes, 1).unwrap();
        assert_relative_eq!(tree.predict_row(&[2.0]), -1.0);
        assert_relative_eq!(tree.predict_row(&[2.0000001]), 1.0);
    }

    #[test]
    fn depth_two_fixture_has_four_distinct_regions() {
        // Split on feature 0 at 0.5, then feature 1 at 0.5 in both branches.
        let nodes = vec![
            Node::Internal { feature: 0, threshold: 0.5, left: 1, right: 2, cover: 8.0, gain: 4.0 },
            Node::Internal { feature: 1, threshold: 0.5, left: 3, right: 4, cover: 4.0, gain: 2.0 },
            Node::Internal { feature: 1, threshold: 0.5, left: 5, right: 6, cover: 4.0, gain: 2.0 },
            Node::Leaf { value: 10.0, cover: 2.0 },
            Node::Leaf { value: 20.0, cover: 2.0 },
            Node::Leaf { value: 30.0, cover: 2.0 },
            Node::Leaf { value: 40.0, cover: 2.0 },
        ];
        let tree = RegressionTree::from_nodes(nodes, 2).unwrap();
        assert_relative_eq!(tree.predict_row(&[0.0, 0.0]), 10.0);
        assert_relative_eq!(tree.predict_row(&[0.0, 1.0]), 20.0);
        assert_relative_eq!(tree.predict_row(&[1.0, 0.0]), 30.0);
        assert_relative_eq!(tree.predict_row(&[1.0, 1.0]), 40.0);
    }

    #[test]
    fn degenerate_forest_equals_single_tree() {
        let x = Matrix::from_rows(&[
            vec![1.0, 7.0],
            vec![2.0, 3.0],
            vec![3.0, 9.0],
            vec![4.0, 1.0],
            vec![5.0, 5.0],
        ]);
        let y = [1.0, 4.0, 2.0, 8.0, 3.0];
        let params = ForestParams { n_estimators: 1, bootstrap: false, tree: plain_params(3) };
        let forest = fit_forest(&x, &y, &params, 11).unwrap();
        let tree = fit_tree(&x, &y, &plain_params(3), 11).unwrap();
        assert_eq!(forest.trees[0], tree);
    }

    #[test]
    fn constant_target_forest_is_all_leaves() {
        let x = single_column(&[1.0, 2.0, 3.0, 4.0]);
        let y = [7.0; 4];
        let params = ForestParams { n_estimators: 5, bootstrap: true, tree: plain_params(6) };
        let forest = fit_forest(&x, &y, &params, 3).unwrap();
        for tree in &forest.trees {
            assert_eq!(tree.nodes().len(), 1);
            assert_relative_eq!(tree.predict_row(&[0.0]), 7.0);
        }
    }

    #[test]
    fn gbdt_with_depth_zero_tree_predicts_the_mean() {
        let x = single_column(&[1.0, 2.0, 3.0, 4.0]);
        let y = [2.0, 4.0, 6.0, 16.0];
        let params = GbdtParams { learning_rate: 0.1, n_estimators: 1, tree: plain_params(0) };
        let model = fit_gbdt(&x, &y, &params, 0).unwrap();
        assert_relative_eq!(model.base_score, 7.0);
        for probe in [0.0, 2.5, 100.0] {
            assert_relative_eq!(model.predict_row(&[probe]), 7.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn full_rate_deep_tree_reaches_zero_training_error() {
        let x = single_column(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = [3.0, -1.0, 4.0, 1.5, 9.0];
        let params = GbdtParams { learning_rate: 1.0, n_estimators: 1, tree: plain_params(8) };
        let model = fit_gbdt(&x, &y, &params, 0).unwrap();
        for (i, target) in y.iter().enumerate() {
            assert_relative_eq!(model.predict_row(x.row(i)), *target, epsilon = 1e-10);
        }
        assert!(model.training_sse[0] < 1e-18);
    }

    #[test]
    fn empty_tree_list_predicts_base_score() {
        let model = GbdtModel {
            base_score: 4.25,
            learning_rate: 0.1,
            trees: vec![],
            n_estimators: 0,
            n_features: 2,
            training_sse: vec![],
        };
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![5.0, -3.0]]);
        assert_eq!(model.predict(&x).unwrap(), vec![4.25, 4.25]);
    }

    #[test]
    fn batch_prediction_matches_row_by_row() {
        let x = Matrix::from_rows(&[
            vec![0.1, 5.0],
            vec![0.9, 2.0],
            vec![0.4, 8.0],
            vec![0.7, 3.0],
            vec![0.2, 9.0],
            vec![0.6, 1.0],
        ]);
        let y = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let params = GbdtParams { learning_rate: 0.3, n_estimators: 12, tree: plain_params(2) };
        let model = fit_gbdt(&x, &y, &params, 5).unwrap();
        let batch = model.predict(&x).unwrap();
        for i in 0..x.n_rows() {
            assert_eq!(batch[i], model.predict_row(x.row(i)));
        }
    }

    #[test]
    fn prediction_rejects_wrong_width() {
        let x = single_column(&[1.0, 2.0, 3.0]);
        let y = [1.0, 2.0, 3.0];
        let params = GbdtParams { n_estimators: 3, ..Default::default() };
        let model = fit_gbdt(&x, &y, &params, 0).unwrap();
        let wide = Matrix::from_rows(&[vec![1.0, 2.0]]);
        assert!(matches!(model.predict(&wide), Err(TreesError::ShapeMismatch(_))));
    }

    #[test]
    fn shape_mismatch_rejected_at_fit() {
        let x = single_column(&[1.0, 2.0, 3.0]);
        let y = [1.0, 2.0];
        assert!(matches!(fit_tree(&x, &y, &plain_params(2), 0), Err(TreesError::ShapeMismatch(_))));
    }

    #[test]
    fn training_sse_is_non_increasing() {
        let x = Matrix::from_rows(
            &(0..40).map(|i| vec![(i as f64 * 0.37).sin(), i as f64]).collect::<Vec<_>>(),
        );
        let y: Vec<f64> =
            (0..40).map(|i| (i as f64 * 0.11).cos() * 5.0 + i as f64 * 0.2).collect();
        let params = GbdtParams { learning_rate: 0.2, n_estimators: 60, tree: plain_params(3) };
        let model = fit_gbdt(&x, &y, &params, 9).unwrap();
        for pair in model.training_sse.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9 * pair[0].abs().max(1.0));
        }
    }

    #[test]
    fn cover_bookkeeping_holds_everywhere() {
        let x = Matrix::from_rows(
            &(0..50)
                .map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()])
                .collect::<Vec<_>>(),
        );
        let y: Vec<f64> = (0..50).map(|i| (i as f64).sqrt()).collect();
        let params = ForestParams { n_estimators: 10, bootstrap: true, tree: plain_params(5) };
        let forest = fit_forest(&x, &y, &params, 21).unwrap();
        for tree in &forest.trees {
            assert_eq!(tree.nodes()[0].cover(), 50.0);
            for node in tree.nodes() {
                if let Node::Internal { left, right, cover, .. } = node {
                    let sum = tree.nodes()[*left].cover() + tree.nodes()[*right].cover();
                    assert_eq!(sum, *cover);
                }
            }
        }
    }

    #[test]
    fn leaf_values_are_routed_means() {
        let x = Matrix::from_rows(
            &(0..30).map(|i| vec![(i as f64 * 1.3).sin(), (i % 7) as f64]).collect::<Vec<_>>(),
        );
        let y: Vec<f64> = (0..30).map(|i| (i as f64 * 0.9).cos() * 3.0).collect();
        let tree = fit_tree(&x, &y, &plain_params(4), 2).unwrap();
        // Group rows by the leaf they route to and compare means.
        let mut leaf_rows: std::collections::HashMap<usize, Vec<usize>> = Default::default();
        for i in 0..x.n_rows() {
            leaf_rows.entry(tree.leaf_index(x.row(i))).or_default().push(i);
        }
        for (leaf, rows) in leaf_rows {
            let mean = rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64;
            match &tree.nodes()[leaf] {
                Node::Leaf { value, cover } => {
                    assert!((value - mean).abs() < 1e-10);
                    assert_eq!(*cover, rows.len() as f64);
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn fitting_is_deterministic() {
        let x = Matrix::from_rows(
            &(0..60)
                .map(|i| vec![(i as f64 * 0.61).sin(), (i as f64 * 0.23).cos(), i as f64 % 5.0])
                .collect::<Vec<_>>(),
        );
        let y: Vec<f64> = (0..60).map(|i| (i as f64 * 0.17).tan().atan()).collect();
        let params = ForestParams {
            n_estimators: 8,
            bootstrap: true,
            tree: TreeParams {
                max_depth: 6,
                min_samples_split: 2,
                min_samples_leaf: 1,
                feature_subsample: FeatureSubsample::Sqrt,
            },
        };
        let a = fit_forest(&x, &y, &params, 77).unwrap();
        let b = fit_forest(&x, &y, &params, 77).unwrap();
        assert_eq!(a, b);
        let c = fit_forest(&x, &y, &params, 78).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gain_importance_cases() {
        // Single leaf: everything zero.
        let x = single_column(&[1.0, 2.0]);
        let y = [3.0, 3.0];
        let params = GbdtParams { n_estimators: 1, ..Default::default() };
        let model = FittedModel::Gbdt(fit_gbdt(&x, &y, &params, 0).unwrap());
        assert_eq!(model.gain_importance(), vec![0.0]);

        // Only feature 1 carries signal: all mass lands there.
        let x = Matrix::from_rows(&[
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![1.0, 3.0],
            vec![1.0, 4.0],
        ]);
        let y = [1.0, 1.0, 5.0, 5.0];
        let tree = fit_tree(&x, &y, &plain_params(3), 0).unwrap();
        let model = FittedModel::Forest(RandomForestModel {
            trees: vec![tree],
            n_estimators: 1,
            bootstrap: false,
            seed: 0,
            n_features: 2,
        });
        let importance = model.gain_importance();
        assert_eq!(importance[0], 0.0);
        assert!(importance[1] > 0.0);
    }

    #[test]
    fn two_split_fixture_importance_matches_hand_computation() {
        // y = [0, 0, 10, 10, 20, 20] over x0 = 0..5. Mean 10, total SSE 400.
        // Thresholds 1.5 and 3.5 both gain 300 (exact tie); the tie rule
        // picks the lower threshold. The right child then splits at 3.5 with
        // gain 100, so total accumulated gain is 400.
        let x = single_column(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = [0.0, 0.0, 10.0, 10.0, 20.0, 20.0];
        let tree = fit_tree(&x, &y, &plain_params(2), 0).unwrap();
        let mut acc = vec![0.0];
        tree.accumulate_gain(&mut acc);
        assert_relative_eq!(acc[0], 400.0, epsilon = 1e-9);
        match &tree.nodes()[0] {
            Node::Internal { threshold, gain, .. } => {
                assert_relative_eq!(*threshold, 1.5);
                assert_relative_eq!(*gain, 300.0, epsilon = 1e-9);
            }
            _ => panic!("root must split"),
        }
    }
}
