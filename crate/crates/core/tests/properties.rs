//! Property tests for the cross-module invariants.

use playerval::dataset::{cap_value, train_test_split, FeatureTable};
use playerval::evaltune::kfold_split;
use playerval::matrix::Matrix;
use playerval::transform::{forward, inverse, BoxCoxParams};
use proptest::prelude::*;

fn table_of(targets: Vec<f64>) -> FeatureTable {
    let n = targets.len();
    let matrix = Matrix::from_flat((0..n).map(|i| i as f64 * 0.5).collect(), n, 1);
    FeatureTable::new(
        vec!["f".to_string()],
        matrix,
        targets,
        (0..n).map(|i| format!("r{i}")).collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn boxcox_roundtrip_and_monotonicity(
        lambda in -2.0..2.0f64,
        xs in proptest::collection::vec(0.05..50.0f64, 2..40),
    ) {
        let params = BoxCoxParams { lambda, shift: 0.0, log_likelihood: 0.0 };
        let ys = forward(&xs, &params).unwrap();
        let back = inverse(&ys, &params).unwrap();
        for (x, b) in xs.iter().zip(&back) {
            prop_assert!((x - b).abs() <= 1e-9 * x.abs());
        }
        // Order preservation.
        let mut pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in pairs.windows(2) {
            if w[0].0 < w[1].0 {
                prop_assert!(w[0].1 < w[1].1);
            }
        }
    }

    #[test]
    fn split_reassembles_the_table(
        n in 5..120usize,
        fraction in 0.05..0.95f64,
        seed in 0..1000u64,
    ) {
        let targets: Vec<f64> = (0..n).map(|i| 1000.0 + i as f64).collect();
        let table = table_of(targets);
        let n_test = (n as f64 * fraction).round() as usize;
        prop_assume!(n_test > 0 && n_test < n);
        let split = train_test_split(&table, fraction, seed).unwrap();
        prop_assert_eq!(split.train.n_rows() + split.test.n_rows(), n);
        // Union of row ids reconstructs the input exactly once each.
        let mut ids: Vec<&String> =
            split.train.row_ids().iter().chain(split.test.row_ids()).collect();
        ids.sort();
        ids.dedup();
        prop_assert_eq!(ids.len(), n);
        // Requested fraction honored within one row.
        prop_assert!((split.test.n_rows() as f64 - n as f64 * fraction).abs() <= 1.0);
    }

    #[test]
    fn cap_keeps_rows_unchanged_and_ordered(
        targets in proptest::collection::vec(1_000.0..60_000_000.0f64, 1..60),
        threshold in 1_000.0..60_000_000.0f64,
    ) {
        let table = table_of(targets.clone());
        let capped = cap_value(&table, threshold);
        prop_assert!(capped.target().iter().all(|v| *v <= threshold));
        let expected: Vec<f64> =
            targets.iter().copied().filter(|v| *v <= threshold).collect();
        prop_assert_eq!(capped.target(), expected.as_slice());
    }

    #[test]
    fn kfold_partitions_indices(n in 2..200usize, k in 2..12usize, seed in 0..500u64) {
        prop_assume!(k <= n);
        let assignment = kfold_split(n, k, seed).unwrap();
        prop_assert_eq!(assignment.len(), n);
        let mut sizes = vec![0usize; k];
        for &fold in &assignment {
            prop_assert!(fold < k);
            sizes[fold] += 1;
        }
        let min = *sizes.iter().min().unwrap();
        let max = *sizes.iter().max().unwrap();
        prop_assert!(max - min <= 1);
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
    }
}
