//! Market-value regression for soccer players.
//!
//! The crate implements the full modeling pipeline as a set of composable
//! modules:
//!
//! * [`dataset`] — CSV ingestion for the player-attribute schema, cleaning,
//!   goalkeeper/outfield partitioning, value capping, and train/test splits.
//! * [`transform`] — Box-Cox power transformation of the target with
//!   maximum-likelihood lambda estimation and an exact inverse.
//! * [`trees`] — CART regression trees, random-forest bagging, and
//!   gradient-boosted decision trees with squared-error loss.
//! * [`selection`] — Boruta all-relevant feature selection against shadow
//!   features with binomial accept/reject tests.
//! * [`evaltune`] — R²/RMSE metrics, k-fold cross-validation, and exhaustive
//!   grid search.
//! * [`explain`] — exact path-dependent TreeSHAP, a brute-force Shapley
//!   oracle, global importance, beeswarm/force exports, and partial
//!   dependence curves.
//! * [`synth`] — seeded synthetic data generators, including a
//!   schema-complete player corpus.
//!
//! All fitting is deterministic for a fixed seed; fitted models and tables
//! are immutable and safe to share across threads.

pub mod artifact;
pub mod dataset;
pub mod evaltune;
pub mod explain;
pub mod matrix;
pub mod selection;
pub mod synth;
pub mod transform;
pub mod trees;

pub use dataset::FeatureTable;
pub use matrix::Matrix;

/// Derives an independent per-stream seed from a base seed.
///
/// Used wherever one user-facing seed has to drive several independent
/// random processes (per-tree bootstraps, per-iteration shadow permutations)
/// without correlated streams.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
