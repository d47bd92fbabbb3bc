//! Leakage guard: statistics fitted inside a fold (imputation means,
//! Box-Cox lambda) must come from the training side only. Perturbing the
//! held-out rows of a marker feature before fold-fitting must leave the
//! fitted statistics, the predictions, and the scores unchanged.

use playerval::dataset::FeatureTable;
use playerval::evaltune::{kfold_split, run_fold, PipelineSpec};
use playerval::matrix::Matrix;
use playerval::trees::{FeatureSubsample, GbdtParams, ModelSpec, TreeParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Three informative features plus a marker column that is 0.0 wherever
/// observed and NaN on a sprinkling of rows (so the imputer has real work).
fn marker_table(n: usize, seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    for i in 0..n {
        let a = rng.random_range(0.0..1.0);
        let b = rng.random_range(0.0..1.0);
        let c = rng.random_range(0.0..1.0);
        let marker = if i % 7 == 3 { f64::NAN } else { 0.0 };
        rows.push(vec![a, b, c, marker]);
        target.push(50.0 + 40.0 * a + 25.0 * b * b + 10.0 * c + rng.random_range(0.0..2.0));
    }
    FeatureTable::new(
        vec!["a".into(), "b".into(), "c".into(), "marker".into()],
        Matrix::from_rows(&rows),
        target,
        (0..n).map(|i| format!("r{i}")).collect(),
    )
    .unwrap()
}

fn perturb_marker(table: &FeatureTable) -> FeatureTable {
    let marker = table.feature_index("marker").unwrap();
    let mut matrix = table.matrix().clone();
    for r in 0..matrix.n_rows() {
        if !matrix.get(r, marker).is_nan() {
            matrix.set(r, marker, 7.3 + r as f64);
        }
    }
    FeatureTable::new(
        table.feature_names().to_vec(),
        matrix,
        table.target().to_vec(),
        table.row_ids().to_vec(),
    )
    .unwrap()
}

#[test]
fn perturbing_heldout_marker_changes_nothing() {
    let table = marker_table(80, 5);
    let spec = PipelineSpec {
        model: ModelSpec::Gbdt(GbdtParams {
            learning_rate: 0.3,
            n_estimators: 15,
            tree: TreeParams {
                max_depth: 3,
                min_samples_split: 2,
                min_samples_leaf: 1,
                feature_subsample: FeatureSubsample::All,
            },
        }),
        transform_target: true,
        impute: true,
    };
    let k = 5;
    let assignments = kfold_split(table.n_rows(), k, 3).unwrap();

    for fold in 0..k {
        let train_rows: Vec<usize> =
            (0..table.n_rows()).filter(|&r| assignments[r] != fold).collect();
        let test_rows: Vec<usize> =
            (0..table.n_rows()).filter(|&r| assignments[r] == fold).collect();
        let train = table.subset_rows(&train_rows);
        let test = table.subset_rows(&test_rows);

        let baseline = run_fold(&spec, &train, &test, 11).unwrap();
        let perturbed = run_fold(&spec, &train, &perturb_marker(&test), 11).unwrap();

        // Fitted statistics are bit-identical: they never saw held-out rows.
        assert_eq!(baseline.stats.boxcox, perturbed.stats.boxcox, "fold {fold}: lambda moved");
        assert_eq!(
            baseline.stats.imputation_means, perturbed.stats.imputation_means,
            "fold {fold}: imputation means moved"
        );
        // The marker mean comes from training rows only, where it is 0.
        assert_eq!(baseline.stats.imputation_means.as_ref().unwrap()[3], 0.0);

        // The marker is constant in training, so no tree references it and
        // held-out scores are unchanged too.
        assert_eq!(baseline.predictions_euro, perturbed.predictions_euro, "fold {fold}");
        assert_eq!(baseline.euro, perturbed.euro, "fold {fold}");
        assert_eq!(baseline.transformed, perturbed.transformed, "fold {fold}");
    }
}
