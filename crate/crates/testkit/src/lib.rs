//! Brute-force oracles and data generators shared by the integration and
//! acceptance suites. Everything here favors obviously-correct computation
//! over speed and stays independent of the implementation paths it checks;
//! the one shared piece is the documented split-selection comparator, which
//! is part of the model contract.

use playerval::matrix::Matrix;
use playerval::trees::{
    better_candidate, fit_gbdt, fit_forest, FeatureSubsample, FittedModel, ForestParams,
    GbdtParams, Node, RegressionTree, SplitCandidate, TreeParams, GAIN_ZERO_REL_FLOOR,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

// ---------------------------------------------------------------------------
// Exhaustive CART oracle
// ---------------------------------------------------------------------------

/// Builds the greedy CART tree by enumerating every `(feature, threshold)`
/// candidate at every node and computing each side's SSE directly from its
/// definition (no prefix sums, no subsampling). Candidates are scanned in
/// ascending `(feature, threshold)` order and compared with the documented
/// selection rule.
pub fn exhaustive_cart(x: &Matrix, y: &[f64], params: &TreeParams) -> RegressionTree {
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    let mut nodes = Vec::new();
    build(x, y, &rows, 0, params, &mut nodes);
    RegressionTree::from_nodes(nodes, x.n_cols()).expect("oracle emits a valid tree")
}

fn sse_of(y: &[f64], rows: &[usize]) -> f64 {
    let mean = rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64;
    rows.iter().map(|&r| (y[r] - mean) * (y[r] - mean)).sum()
}

fn build(
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    depth: usize,
    params: &TreeParams,
    nodes: &mut Vec<Node>,
) -> usize {
    let n = rows.len();
    let cover = n as f64;
    let mean = rows.iter().map(|&r| y[r]).sum::<f64>() / cover;
    let push_leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf { value: mean, cover });
        nodes.len() - 1
    };
    if depth >= params.max_depth || n < params.min_samples_split || n < 2 * params.min_samples_leaf
    {
        return push_leaf(nodes);
    }
    let sse = sse_of(y, rows);
    if sse <= 0.0 {
        return push_leaf(nodes);
    }

    let mut best: Option<SplitCandidate> = None;
    for feature in 0..x.n_cols() {
        let mut values: Vec<f64> = rows.iter().map(|&r| x.get(r, feature)).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for pair in values.windows(2) {
            let mut threshold = 0.5 * (pair[0] + pair[1]);
            if threshold >= pair[1] {
                threshold = pair[0];
            }
            let (left, right): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| x.get(r, feature) <= threshold);
            if left.len() < params.min_samples_leaf || right.len() < params.min_samples_leaf {
                continue;
            }
            let gain = sse - sse_of(y, &left) - sse_of(y, &right);
            let candidate = SplitCandidate { feature, threshold, gain };
            if better_candidate(&candidate, &best) {
                best = Some(candidate);
            }
        }
    }

    let best = match best {
        Some(c) if c.gain > GAIN_ZERO_REL_FLOOR * sse => c,
        _ => return push_leaf(nodes),
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| x.get(r, best.feature) <= best.threshold);
    let index = nodes.len();
    nodes.push(Node::Leaf { value: mean, cover });
    let left = build(x, y, &left_rows, depth + 1, params, nodes);
    let right = build(x, y, &right_rows, depth + 1, params, nodes);
    nodes[index] = Node::Internal {
        feature: best.feature,
        threshold: best.threshold,
        left,
        right,
        cover,
        gain: best.gain,
    };
    index
}

/// Structural tree equality with a small tolerance on stored reals: same
/// topology, identical split features and thresholds, leaf values and gains
/// within `1e-9` relative.
pub fn trees_equivalent(a: &RegressionTree, b: &RegressionTree) -> bool {
    fn close(x: f64, y: f64) -> bool {
        (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0)
    }
    fn walk(a: &RegressionTree, b: &RegressionTree, ia: usize, ib: usize) -> bool {
        match (&a.nodes()[ia], &b.nodes()[ib]) {
            (Node::Leaf { value: va, cover: ca }, Node::Leaf { value: vb, cover: cb }) => {
                close(*va, *vb) && ca == cb
            }
            (
                Node::Internal {
                    feature: fa, threshold: ta, left: la, right: ra, cover: ca, gain: ga,
                },
                Node::Internal {
                    feature: fb, threshold: tb, left: lb, right: rb, cover: cb, gain: gb,
                },
            ) => {
                fa == fb
                    && ta == tb
                    && ca == cb
                    && close(*ga, *gb)
                    && walk(a, b, *la, *lb)
                    && walk(a, b, *ra, *rb)
            }
            _ => false,
        }
    }
    walk(a, b, 0, 0)
}

// ---------------------------------------------------------------------------
// Box-Cox profile likelihood grid-scan oracle
// ---------------------------------------------------------------------------

/// Profile log-likelihood computed directly from its definition,
/// independently of the transform module.
pub fn boxcox_ll_direct(values: &[f64], lambda: f64) -> f64 {
    let n = values.len() as f64;
    let transformed: Vec<f64> = values
        .iter()
        .map(|&x| if lambda.abs() < 1e-9 { x.ln() } else { (x.powf(lambda) - 1.0) / lambda })
        .collect();
    let mean = transformed.iter().sum::<f64>() / n;
    let variance = transformed.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n;
    let log_sum: f64 = values.iter().map(|x| x.ln()).sum();
    -0.5 * n * variance.ln() + (lambda - 1.0) * log_sum
}

/// Argmax of the profile log-likelihood over a fixed-step grid.
pub fn boxcox_grid_argmax(values: &[f64], lo: f64, hi: f64, step: f64) -> f64 {
    let mut best_lambda = lo;
    let mut best_ll = f64::NEG_INFINITY;
    let steps = ((hi - lo) / step).round() as usize;
    for i in 0..=steps {
        let lambda = lo + i as f64 * step;
        let ll = boxcox_ll_direct(values, lambda);
        if ll > best_ll {
            best_ll = ll;
            best_lambda = lambda;
        }
    }
    best_lambda
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// A random small ensemble (either family) fitted on random data, plus probe
/// rows drawn over an inflated range so some fall outside the training hull.
pub fn random_small_ensemble(
    seed: u64,
    max_features: usize,
    max_depth: usize,
    max_trees: usize,
    n_probes: usize,
) -> (FittedModel, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=max_features);
    let n = rng.random_range(8..=40);
    let n_trees = rng.random_range(1..=max_trees);
    let depth = rng.random_range(1..=max_depth);
    let normal = Normal::new(0.0, 1.0).unwrap();

    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        rows.push((0..m).map(|_| normal.sample(&mut rng)).collect::<Vec<f64>>());
        y.push(normal.sample(&mut rng) * 3.0);
    }
    let x = Matrix::from_rows(&rows);
    let tree = TreeParams {
        max_depth: depth,
        min_samples_split: 2,
        min_samples_leaf: 1,
        feature_subsample: FeatureSubsample::All,
    };
    let model = if rng.random_bool(0.5) {
        let params = GbdtParams {
            learning_rate: rng.random_range(0.05..1.0),
            n_estimators: n_trees,
            tree,
        };
        FittedModel::Gbdt(fit_gbdt(&x, &y, &params, seed).unwrap())
    } else {
        let params = ForestParams { n_estimators: n_trees, bootstrap: true, tree };
        FittedModel::Forest(fit_forest(&x, &y, &params, seed).unwrap())
    };
    let probes = (0..n_probes)
        .map(|_| (0..m).map(|_| normal.sample(&mut rng) * 1.5).collect())
        .collect();
    (model, probes)
}

// ---------------------------------------------------------------------------
// Statistics helpers
// ---------------------------------------------------------------------------

/// Spearman rank correlation with midranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let ra = midranks(a);
    let rb = midranks(b);
    pearson(&ra, &rb)
}

fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va.sqrt() * vb.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_handles_monotone_and_ties() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [10.0, 20.0, 30.0, 40.0];
        assert!((spearman(&a, &b) - 1.0).abs() < 1e-12);
        let c = [40.0, 30.0, 20.0, 10.0];
        assert!((spearman(&a, &c) + 1.0).abs() < 1e-12);
        let tied = [1.0, 1.0, 2.0, 2.0];
        let r = spearman(&tied, &b);
        assert!(r > 0.8);
    }

    #[test]
    fn oracle_handles_tiny_inputs() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]);
        let y = [1.0, 5.0];
        let params = TreeParams {
            max_depth: 2,
            min_samples_split: 2,
            min_samples_leaf: 1,
            feature_subsample: FeatureSubsample::All,
        };
        let tree = exhaustive_cart(&x, &y, &params);
        assert_eq!(tree.n_leaves(), 2);
    }
}
