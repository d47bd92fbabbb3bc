//! Seeded synthetic data generators: a standard nonlinear regression
//! benchmark for desk-scale model checks, and a schema-complete player
//! corpus for exercising the full pipeline without the original data.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{FeatureTable, GOALKEEPER_FEATURES, OUTFIELD_FEATURES};
use crate::matrix::Matrix;

/// Friedman #1: ten uniform features of which five carry signal,
/// `y = 10 sin(pi x0 x1) + 20 (x2 - 0.5)^2 + 10 x3 + 5 x4 + noise`.
pub fn friedman1(n: usize, noise_sd: f64, seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..10).map(|_| rng.random_range(0.0..1.0)).collect();
        let y = 10.0 * (std::f64::consts::PI * row[0] * row[1]).sin()
            + 20.0 * (row[2] - 0.5) * (row[2] - 0.5)
            + 10.0 * row[3]
            + 5.0 * row[4]
            + noise_sd * normal.sample(&mut rng);
        rows.push(row);
        target.push(y);
    }
    FeatureTable::new(
        (0..10).map(|i| format!("x{i}")).collect(),
        Matrix::from_rows(&rows),
        target,
        (0..n).map(|i| format!("r{i}")).collect(),
    )
    .expect("generator emits a consistent table")
}

/// Options for [`sofifa_corpus_csv`].
#[derive(Debug, Clone, Copy)]
pub struct CorpusOptions {
    pub n_rows: usize,
    /// Fraction of rows generated as goalkeepers.
    pub goalkeeper_fraction: f64,
    /// Per-cell probability of a blank skill cell.
    pub missing_cell_rate: f64,
    pub seed: u64,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        Self { n_rows: 12_000, goalkeeper_fraction: 0.11, missing_cell_rate: 0.004, seed: 1 }
    }
}

// Skill columns without a tie to the latent ability. Everything else loads
// on it, which gives the selection stage genuine accept/reject work.
const UNINFORMATIVE: [&str; 7] =
    ["Curve", "Agility", "Balance", "Jumping", "Long_Shots", "Aggression", "Composure"];

/// Generates a schema-complete player CSV: metadata columns, 29 outfield
/// skill columns, 5 goalkeeper columns, a long-tailed euro value with a few
/// percent of rows above the usual cap, and occasional blank cells.
pub fn sofifa_corpus_csv(opts: &CorpusOptions) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut out = String::new();

    let mut header: Vec<&str> = vec!["name", "value", "wage", "overall_rating", "potential"];
    header.extend(OUTFIELD_FEATURES);
    header.extend(GOALKEEPER_FEATURES);
    out.push_str(&header.join(","));
    out.push('\n');

    let clamp_skill = |v: f64| -> i64 { (v.round() as i64).clamp(1, 99) };

    for i in 0..opts.n_rows {
        let is_goalkeeper = rng.random_range(0.0..1.0) < opts.goalkeeper_fraction;
        let ability: f64 = normal.sample(&mut rng);

        // Long-tailed value: log-linear in ability, roughly 3% above 25M.
        let log_value = 600_000f64.ln() + 1.9 * ability + 0.35 * normal.sample(&mut rng);
        let value = log_value.exp().clamp(15_000.0, 190_000_000.0).round() as i64;
        let wage = (value / 120).max(500);
        let overall = clamp_skill(65.0 + 11.0 * ability + 3.0 * normal.sample(&mut rng));
        let potential = (overall + rng.random_range(0..=12)).min(99);

        let mut cells: Vec<String> = vec![
            format!("Player {i:05}"),
            value.to_string(),
            wage.to_string(),
            overall.to_string(),
            potential.to_string(),
        ];
        for feature in OUTFIELD_FEATURES {
            let base = if is_goalkeeper {
                30.0 + 8.0 * normal.sample(&mut rng)
            } else if UNINFORMATIVE.contains(&feature) {
                65.0 + 7.0 * normal.sample(&mut rng)
            } else {
                65.0 + 11.0 * ability + 7.0 * normal.sample(&mut rng)
            };
            let missing = rng.random_range(0.0..1.0) < opts.missing_cell_rate;
            cells.push(if missing { String::new() } else { clamp_skill(base).to_string() });
        }
        for _ in GOALKEEPER_FEATURES {
            if is_goalkeeper {
                let skill = clamp_skill(65.0 + 11.0 * ability + 7.0 * normal.sample(&mut rng));
                let missing = rng.random_range(0.0..1.0) < opts.missing_cell_rate;
                cells.push(if missing { String::new() } else { skill.to_string() });
            } else {
                cells.push(String::new());
            }
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
