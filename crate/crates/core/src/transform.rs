//! Box-Cox power transformation of the regression target.
//!
//! The forward transform is `y = (x^lambda - 1) / lambda` for `lambda != 0`
//! and `y = ln(x)` at `lambda = 0`; lambda is estimated by maximizing the
//! profile log-likelihood over a search interval with golden-section search.
//! The inverse is exact on the transform's image, which makes euro-scale
//! predictions recoverable from transformed-scale model output.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lambda magnitudes below this use the log branch.
pub const LAMBDA_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("non-positive input at index {index}: {value} (after shift {shift})")]
    NonPositiveInput { index: usize, value: f64, shift: f64 },
    #[error("degenerate input: fewer than 3 values or all values equal")]
    DegenerateInput,
    #[error("value at index {index} outside the transform's image: lambda*y + 1 = {argument} <= 0")]
    OutOfDomain { index: usize, argument: f64 },
}

/// Fitted Box-Cox parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCoxParams {
    /// Power parameter maximizing the profile log-likelihood.
    pub lambda: f64,
    /// Added to inputs before transforming (0 unless auto-shift kicked in).
    pub shift: f64,
    /// Profile log-likelihood at `lambda`; recomputable from the data.
    pub log_likelihood: f64,
}

/// Options for [`fit_lambda`].
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Closed search interval for lambda.
    pub search_interval: (f64, f64),
    /// Interval width at which golden-section search stops.
    pub tol: f64,
    /// When true and a non-positive value is present, a shift of
    /// `1 - min(values)` is applied before fitting.
    pub allow_shift: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { search_interval: (-5.0, 5.0), tol: 1e-6, allow_shift: false }
    }
}

fn transform_one(x: f64, lambda: f64) -> f64 {
    if lambda.abs() < LAMBDA_EPS {
        x.ln()
    } else {
        (x.powf(lambda) - 1.0) / lambda
    }
}

fn check_positive(values: &[f64], shift: f64) -> Result<(), TransformError> {
    for (index, &v) in values.iter().enumerate() {
        if !(v + shift > 0.0) {
            return Err(TransformError::NonPositiveInput { index, value: v, shift });
        }
    }
    Ok(())
}

/// Profile log-likelihood of the Box-Cox transform at `lambda`:
/// `-(n/2) * ln(sigma^2(lambda)) + (lambda - 1) * sum(ln(x_i))`, where
/// `sigma^2` is the biased variance of the transformed values.
pub fn profile_log_likelihood(
    values: &[f64],
    shift: f64,
    lambda: f64,
) -> Result<f64, TransformError> {
    check_positive(values, shift)?;
    let n = values.len();
    if n < 3 {
        return Err(TransformError::DegenerateInput);
    }
    let n_f = n as f64;
    let mut sum = 0.0;
    let mut log_sum = 0.0;
    let mut transformed = Vec::with_capacity(n);
    for &v in values {
        let x = v + shift;
        let t = transform_one(x, lambda);
        transformed.push(t);
        sum += t;
        log_sum += x.ln();
    }
    let mean = sum / n_f;
    let variance = transformed.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n_f;
    if variance <= 0.0 {
        return Err(TransformError::DegenerateInput);
    }
    Ok(-0.5 * n_f * variance.ln() + (lambda - 1.0) * log_sum)
}

/// Estimates lambda by golden-section search on the profile log-likelihood.
pub fn fit_lambda(values: &[f64], opts: &FitOptions) -> Result<BoxCoxParams, TransformError> {
    if values.len() < 3 {
        return Err(TransformError::DegenerateInput);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(TransformError::DegenerateInput);
    }
    let shift = if min <= 0.0 && opts.allow_shift { 1.0 - min } else { 0.0 };
    check_positive(values, shift)?;

    let (mut lo, mut hi) = opts.search_interval;
    assert!(lo < hi, "empty search interval");
    let ll = |lambda: f64| profile_log_likelihood(values, shift, lambda);

    // Golden-section search for the maximum of a unimodal function.
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = ll(a)?;
    let mut fb = ll(b)?;
    while hi - lo > opts.tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = ll(b)?;
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = ll(a)?;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let log_likelihood = ll(lambda)?;
    Ok(BoxCoxParams { lambda, shift, log_likelihood })
}

/// Forward Box-Cox transform of each value.
pub fn forward(values: &[f64], params: &BoxCoxParams) -> Result<Vec<f64>, TransformError> {
    check_positive(values, params.shift)?;
    Ok(values.iter().map(|&v| transform_one(v + params.shift, params.lambda)).collect())
}

pub fn forward_one(value: f64, params: &BoxCoxParams) -> Result<f64, TransformError> {
    check_positive(std::slice::from_ref(&value), params.shift)?;
    Ok(transform_one(value + params.shift, params.lambda))
}

/// Exact inverse: `x = (lambda*y + 1)^(1/lambda) - shift`, or `exp(y) - shift`
/// on the log branch.
pub fn inverse(values: &[f64], params: &BoxCoxParams) -> Result<Vec<f64>, TransformError> {
    values.iter().enumerate().map(|(i, &y)| inverse_at(y, params, i)).collect()
}

pub fn inverse_one(value: f64, params: &BoxCoxParams) -> Result<f64, TransformError> {
    inverse_at(value, params, 0)
}

fn inverse_at(y: f64, params: &BoxCoxParams, index: usize) -> Result<f64, TransformError> {
    if params.lambda.abs() < LAMBDA_EPS {
        Ok(y.exp() - params.shift)
    } else {
        let argument = params.lambda * y + 1.0;
        if argument <= 0.0 {
            return Err(TransformError::OutOfDomain { index, argument });
        }
        Ok(argument.powf(1.0 / params.lambda) - params.shift)
    }
}
