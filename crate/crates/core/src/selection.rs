//! Boruta all-relevant feature selection.
//!
//! Each iteration permutes every still-undecided feature into a shadow
//! column, fits the configured model on `[real | shadow]` columns, and
//! scores a hit for each real feature whose importance strictly exceeds the
//! maximum shadow importance. Accumulated hits feed a two-sided binomial
//! test (p = 0.5, Bonferroni-corrected over the undecided features) that
//! promotes features to accepted or rejected; whatever is still undecided at
//! exhaustion is reported tentative, never force-resolved.
//!
//! The shadow pool never shrinks below [`MIN_SHADOWS`] columns (padded by
//! cycling extra permutations of the undecided features). With one or two
//! survivors the max-of-shadows bar would otherwise degrade to a coin flip
//! and in-sample spurious correlations start passing the acceptance test.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::FeatureTable;
use crate::derive_seed;
use crate::explain::{self, ExplainError};
use crate::matrix::Matrix;
use crate::trees::{ModelSpec, TreesError};

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("Boruta needs at least {minimum} rows, got {n_rows}")]
    TooFewRows { n_rows: usize, minimum: usize },
    #[error("Boruta needs at least 2 features, got {n_features}")]
    TooFewFeatures { n_features: usize },
    #[error("invalid Boruta config: {0}")]
    InvalidConfig(String),
    #[error("internal model fit failed: {0}")]
    ModelFitFailure(#[from] TreesError),
    #[error("importance computation failed: {0}")]
    Importance(#[from] ExplainError),
}

/// Minimum row count accepted by [`run_boruta`].
pub const MIN_ROWS: usize = 20;

/// Floor on the number of shadow columns per iteration.
pub const MIN_SHADOWS: usize = 5;

/// Where per-column importances come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceSource {
    /// Mean `|SHAP|` from the explain module (the default, slower).
    Shap,
    /// Total split gain (fast fallback).
    Gain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorutaConfig {
    pub max_iterations: usize,
    pub alpha: f64,
    pub importance_source: ImportanceSource,
    /// Model fitted on `[real | shadow]` columns each iteration.
    pub model: ModelSpec,
    pub seed: u64,
    /// No accept/reject decision before this many iterations; the binomial
    /// test is vacuous earlier.
    pub min_iterations: usize,
    /// Row cap for SHAP importance; `None` uses every row.
    pub shap_rows: Option<usize>,
}

impl BorutaConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            max_iterations: 100,
            alpha: 0.05,
            importance_source: ImportanceSource::Shap,
            model: ModelSpec::Forest(Default::default()),
            seed,
            min_iterations: 5,
            shap_rows: Some(256),
        }
    }

    fn validate(&self) -> Result<(), SelectionError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SelectionError::InvalidConfig(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        if self.max_iterations < 10 {
            return Err(SelectionError::InvalidConfig("max_iterations must be >= 10".into()));
        }
        if self.max_iterations > 1000 {
            // The binomial tail underflows f64 past ~1000 trials.
            return Err(SelectionError::InvalidConfig("max_iterations must be <= 1000".into()));
        }
        if self.min_iterations < 1 {
            return Err(SelectionError::InvalidConfig("min_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Importances of the real features in one iteration, `None` for features
/// already decided and therefore absent from the fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub shadow_max: f64,
    pub importances: Vec<Option<f64>>,
}

/// Outcome of a Boruta run. Feature lists keep the input column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorutaVerdict {
    pub accepted: Vec<String>,
    pub rejected: Vec<String>,
    pub tentative: Vec<String>,
    pub hit_counts: Vec<(String, usize)>,
    /// Iteration at which each feature was decided; `None` for tentative.
    pub decided_at: Vec<(String, Option<usize>)>,
    pub iterations_run: usize,
    pub importance_history: Vec<IterationRecord>,
}

impl BorutaVerdict {
    /// The downstream feature list: accepted features, optionally extended
    /// by tentative ones, in input order.
    pub fn selected_features(&self, include_tentative: bool) -> Vec<String> {
        self.hit_counts
            .iter()
            .map(|(name, _)| name)
            .filter(|name| {
                self.accepted.contains(name)
                    || (include_tentative && self.tentative.contains(name))
            })
            .cloned()
            .collect()
    }
}

/// `P(X <= k)` for `X ~ Binomial(n, 1/2)`.
fn binomial_tail_le(k: usize, n: usize) -> f64 {
    let mut pmf = 0.5f64.powi(n as i32);
    let mut cdf = pmf;
    for j in 0..k {
        pmf *= (n - j) as f64 / (j + 1) as f64;
        cdf += pmf;
    }
    cdf.min(1.0)
}

/// Exact two-sided binomial test p-value at p = 0.5: twice the smaller tail,
/// capped at 1.
pub fn binomial_two_sided_p(k: usize, n: usize) -> f64 {
    assert!(k <= n, "k must not exceed n");
    let p_low = binomial_tail_le(k, n);
    let p_high = binomial_tail_le(n - k, n); // P(X >= k) by symmetry
    (2.0 * p_low.min(p_high)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Decision {
    Undecided,
    Accepted,
    Rejected,
}

/// Runs Boruta on the table's features against its target.
pub fn run_boruta(
    table: &FeatureTable,
    config: &BorutaConfig,
) -> Result<BorutaVerdict, SelectionError> {
    config.validate()?;
    let n_rows = table.n_rows();
    let m = table.n_features();
    if n_rows < MIN_ROWS {
        return Err(SelectionError::TooFewRows { n_rows, minimum: MIN_ROWS });
    }
    if m < 2 {
        return Err(SelectionError::TooFewFeatures { n_features: m });
    }

    let names = table.feature_names();
    let mut decisions = vec![Decision::Undecided; m];
    let mut hits = vec![0usize; m];
    let mut decided_at = vec![None; m];
    let mut history = Vec::new();
    let mut iterations_run = 0;

    for iteration in 1..=config.max_iterations {
        let undecided: Vec<usize> =
            (0..m).filter(|&f| decisions[f] == Decision::Undecided).collect();
        if undecided.is_empty() {
            break;
        }
        iterations_run = iteration;
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(config.seed, iteration as u64));

        // Real columns still in play: undecided plus accepted, input order.
        let real: Vec<usize> =
            (0..m).filter(|&f| decisions[f] != Decision::Rejected).collect();
        let real_matrix = table.matrix().select_columns(&real);

        // One shadow per undecided feature — an independent permutation of
        // its values, preserving the marginal distribution — padded to the
        // shadow floor by cycling through the undecided features again.
        let n_shadows = undecided.len().max(MIN_SHADOWS);
        let shadow_sources: Vec<usize> =
            undecided.iter().copied().cycle().take(n_shadows).collect();
        let mut shadow_rows = vec![Vec::with_capacity(n_shadows); n_rows];
        for &f in &shadow_sources {
            let mut column = table.column(f);
            column.shuffle(&mut rng);
            for (r, v) in column.into_iter().enumerate() {
                shadow_rows[r].push(v);
            }
        }
        let mut shadow_flat = Vec::with_capacity(n_rows * n_shadows);
        for row in &shadow_rows {
            shadow_flat.extend_from_slice(row);
        }
        let shadow_matrix = Matrix::from_flat(shadow_flat, n_rows, n_shadows);
        let combined = real_matrix.hstack(&shadow_matrix);

        let model = config.model.fit(&combined, table.target(), derive_seed(config.seed, (iteration as u64) << 32))?;
        let importances = match config.importance_source {
            ImportanceSource::Gain => model.gain_importance(),
            ImportanceSource::Shap => {
                let rows: Vec<usize> = match config.shap_rows {
                    Some(cap) if cap < n_rows => {
                        let mut picked =
                            rand::seq::index::sample(&mut rng, n_rows, cap).into_vec();
                        picked.sort_unstable();
                        picked
                    }
                    _ => (0..n_rows).collect(),
                };
                let sample = combined.select_rows(&rows);
                let column_names: Vec<String> = real
                    .iter()
                    .map(|&f| names[f].clone())
                    .chain(
                        shadow_sources
                            .iter()
                            .enumerate()
                            .map(|(k, &f)| format!("shadow{k}__{}", names[f])),
                    )
                    .collect();
                let sample_table = FeatureTable::new(
                    column_names,
                    sample,
                    vec![0.0; rows.len()],
                    rows.iter().map(|r| r.to_string()).collect(),
                )
                .expect("shadow table is well-formed");
                let explanation = explain::tree_shap(&model, &sample_table)?;
                let n_samples = explanation.n_samples() as f64;
                (0..explanation.n_features())
                    .map(|c| {
                        (0..explanation.n_samples())
                            .map(|r| explanation.shap_values.get(r, c).abs())
                            .sum::<f64>()
                            / n_samples
                    })
                    .collect()
            }
        };

        let shadow_max = importances[real.len()..]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut record = IterationRecord {
            iteration,
            shadow_max,
            importances: vec![None; m],
        };
        for (position, &f) in real.iter().enumerate() {
            record.importances[f] = Some(importances[position]);
            if decisions[f] == Decision::Undecided && importances[position] > shadow_max {
                hits[f] += 1;
            }
        }
        history.push(record);

        if iteration >= config.min_iterations {
            // Bonferroni over the features undecided entering this round.
            let corrected_alpha = config.alpha / undecided.len() as f64;
            for &f in &undecided {
                let p = binomial_two_sided_p(hits[f], iteration);
                if p < corrected_alpha {
                    decisions[f] = if 2 * hits[f] > iteration {
                        Decision::Accepted
                    } else {
                        Decision::Rejected
                    };
                    decided_at[f] = Some(iteration);
                }
            }
        }
    }

    let collect = |want: Decision| -> Vec<String> {
        (0..m).filter(|&f| decisions[f] == want).map(|f| names[f].clone()).collect()
    };
    Ok(BorutaVerdict {
        accepted: collect(Decision::Accepted),
        rejected: collect(Decision::Rejected),
        tentative: collect(Decision::Undecided),
        hit_counts: names.iter().cloned().zip(hits).collect(),
        decided_at: names.iter().cloned().zip(decided_at).collect(),
        iterations_run,
        importance_history: history,
    })
}
