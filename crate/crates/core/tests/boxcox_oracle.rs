//! Box-Cox lambda estimation against a dense grid-scan oracle, plus the
//! large-sample roundtrip sweep.

use playerval::transform::{fit_lambda, forward, inverse, BoxCoxParams, FitOptions};
use playerval_testkit::boxcox_grid_argmax;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn lognormal_sample(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::<f64>::new(0.0, 1.0).unwrap();
    (0..n).map(|_| normal.sample(&mut rng).exp()).collect()
}

#[test]
fn lognormal_data_fits_lambda_near_zero() {
    let values = lognormal_sample(5000, 7);
    let fitted = fit_lambda(&values, &FitOptions::default()).unwrap();
    assert!(
        fitted.lambda.abs() <= 0.1,
        "lambda {} outside [-0.1, 0.1] for log-normal data",
        fitted.lambda
    );
}

#[test]
fn normal_shaped_data_fits_lambda_near_one() {
    // With sd/mean = 0.05 the transform is near-linear over the data range,
    // so lambda is weakly identified and scatters widely across samples.
    // This fixture's true (grid-scanned) optimum sits near 1; assert both
    // that the optimizer finds it and that it lands in the expected band.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let normal = Normal::<f64>::new(100.0, 5.0).unwrap();
    let values: Vec<f64> = (0..4000).map(|_| normal.sample(&mut rng).max(1.0)).collect();
    let fitted = fit_lambda(&values, &FitOptions::default()).unwrap();
    let grid = boxcox_grid_argmax(&values, -5.0, 5.0, 0.001);
    assert!(
        (fitted.lambda - grid).abs() <= 0.002,
        "golden-section {} vs grid argmax {grid}",
        fitted.lambda
    );
    assert!(
        (fitted.lambda - 1.0).abs() <= 0.15,
        "lambda {} not within 0.15 of 1 for normal-shaped data",
        fitted.lambda
    );
}

#[test]
fn golden_section_matches_grid_scan_argmax() {
    for (n, seed) in [(5000usize, 7u64), (800, 3), (200, 19)] {
        let values = lognormal_sample(n, seed);
        let fitted = fit_lambda(&values, &FitOptions::default()).unwrap();
        let grid = boxcox_grid_argmax(&values, -5.0, 5.0, 0.001);
        assert!(
            (fitted.lambda - grid).abs() <= 0.002,
            "n={n} seed={seed}: golden-section {} vs grid argmax {grid}",
            fitted.lambda
        );
    }
}

#[test]
fn thousand_random_roundtrips_within_1e9() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let lambda = rng.random_range(-2.0..2.0);
        let x = rng.random_range(0.05..50.0);
        let params = BoxCoxParams { lambda, shift: 0.0, log_likelihood: 0.0 };
        let y = forward(&[x], &params).unwrap();
        let back = inverse(&y, &params).unwrap()[0];
        assert!(
            (back - x).abs() <= 1e-9 * x.abs(),
            "roundtrip failed at x={x}, lambda={lambda}: got {back}"
        );
    }
}
