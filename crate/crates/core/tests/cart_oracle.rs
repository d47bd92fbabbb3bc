//! Greedy split finding against an exhaustive brute-force oracle.

use playerval::matrix::Matrix;
use playerval::trees::{fit_tree, FeatureSubsample, Node, TreeParams};
use playerval_testkit::{exhaustive_cart, trees_equivalent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn full_scan_params(max_depth: usize, min_samples_leaf: usize) -> TreeParams {
    TreeParams {
        max_depth,
        min_samples_split: 2,
        min_samples_leaf,
        feature_subsample: FeatureSubsample::All,
    }
}

#[test]
fn eight_row_instance_matches_brute_force_split() {
    let x = Matrix::from_rows(&[
        vec![0.31, 4.0],
        vec![0.93, 1.0],
        vec![0.17, 3.0],
        vec![0.55, 8.0],
        vec![0.72, 2.0],
        vec![0.04, 9.0],
        vec![0.88, 6.0],
        vec![0.46, 5.0],
    ]);
    let y = [3.1, 0.4, 2.8, 1.9, 0.9, 3.6, 0.2, 2.1];
    let params = full_scan_params(1, 1);
    let fitted = fit_tree(&x, &y, &params, 0).unwrap();
    let oracle = exhaustive_cart(&x, &y, &params);
    match (&fitted.nodes()[0], &oracle.nodes()[0]) {
        (
            Node::Internal { feature: fa, threshold: ta, .. },
            Node::Internal { feature: fb, threshold: tb, .. },
        ) => {
            assert_eq!(fa, fb);
            assert_eq!(ta, tb);
        }
        other => panic!("expected root splits on both sides, got {other:?}"),
    }
}

#[test]
fn hundred_random_instances_reproduce_the_exhaustive_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    for case in 0..100 {
        let n = rng.random_range(4..=10);
        let m = rng.random_range(1..=3);
        let max_depth = rng.random_range(1..=3);
        let min_leaf = rng.random_range(1..=2);
        // Mix continuous and low-cardinality integer-ish features so exact
        // gain ties (identical partitions through different features) occur.
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..m)
                .map(|j| {
                    if j % 2 == 0 {
                        rng.random_range(0.0..1.0)
                    } else {
                        rng.random_range(0..4) as f64
                    }
                })
                .collect();
            rows.push(row);
        }
        let x = Matrix::from_rows(&rows);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let params = full_scan_params(max_depth, min_leaf);
        let fitted = fit_tree(&x, &y, &params, 0).unwrap();
        let oracle = exhaustive_cart(&x, &y, &params);
        assert!(
            trees_equivalent(&fitted, &oracle),
            "case {case}: fitted tree diverges from the exhaustive oracle\nfitted: {fitted:?}\noracle: {oracle:?}"
        );
    }
}
