//! Player-attribute tables: CSV ingestion, cleaning, goalkeeper/outfield
//! partitioning, value capping, and seeded train/test splits.
//!
//! The on-disk schema is a UTF-8, comma-delimited CSV with a header row.
//! Metadata columns are `name`, `value`, `wage`, `overall_rating`,
//! `potential`; skill columns are the 29 outfield attributes and the 5
//! goalkeeper attributes listed in [`OUTFIELD_FEATURES`] and
//! [`GOALKEEPER_FEATURES`]. Euro values are plain integers.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

/// The 29 outfield skill columns, in schema order.
pub const OUTFIELD_FEATURES: [&str; 29] = [
    "Crossing",
    "Finishing",
    "Heading_Accuracy",
    "Short_Passing",
    "Volleys",
    "Dribbling",
    "Curve",
    "FK_Accuracy",
    "Long_Passing",
    "Ball_Control",
    "Acceleration",
    "Sprint_Speed",
    "Agility",
    "Reactions",
    "Balance",
    "Shot_Power",
    "Jumping",
    "Stamina",
    "Strength",
    "Long_Shots",
    "Aggression",
    "Interceptions",
    "Positioning",
    "Vision",
    "Penalties",
    "Composure",
    "Defensive_Awareness",
    "Standing_Tackle",
    "Sliding_Tackle",
];

/// The 5 goalkeeper skill columns. The source schema does not name them;
/// this naming follows the `GK_` convention of the upstream site.
pub const GOALKEEPER_FEATURES: [&str; 5] =
    ["GK_Diving", "GK_Handling", "GK_Kicking", "GK_Positioning", "GK_Reflexes"];

/// Default cap on retained player values, in euros. Rows strictly above it
/// are removed by [`cap_value`].
pub const DEFAULT_VALUE_CAP: f64 = 25_000_000.0;

/// Inclusive range of valid skill scores.
pub const SKILL_RANGE: (f64, f64) = (1.0, 99.0);

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("required column {column:?} missing from header")]
    MissingColumn { column: String },
    #[error("malformed row {row}: wrong field count")]
    MalformedRow { row: usize },
    #[error("row {row} is missing a value for column {column:?}")]
    MissingCell { row: usize, column: String },
    #[error("all rows were dropped during cleaning")]
    EmptyResult,
    #[error("split of {n_rows} rows would leave an empty side (test size {n_test})")]
    DegenerateSplit { n_rows: usize, n_test: usize },
    #[error("test fraction must be in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("duplicate feature name {0:?}")]
    DuplicateFeature(String),
    #[error("feature {feature:?} has no observed values to impute from")]
    AllMissing { feature: String },
    #[error("unknown feature {feature:?}")]
    UnknownFeature { feature: String },
}

/// One raw row of the player schema. Cells that were absent or failed to
/// parse are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerRecord {
    pub name: String,
    pub value: Option<f64>,
    pub wage: Option<f64>,
    pub overall_rating: Option<f64>,
    pub potential: Option<f64>,
    pub outfield: [Option<f64>; 29],
    pub goalkeeper: [Option<f64>; 5],
}

impl PlayerRecord {
    /// A record is a goalkeeper iff all 5 goalkeeper attributes are present
    /// and in range.
    pub fn is_goalkeeper(&self) -> bool {
        self.goalkeeper.iter().all(|c| valid_skill(*c).is_some())
    }
}

/// A loaded set of raw records plus load diagnostics.
#[derive(Debug, Clone)]
pub struct PlayerRecordSet {
    pub records: Vec<PlayerRecord>,
    /// Number of cells whose text failed to parse as a number.
    pub parse_failures: usize,
}

impl PlayerRecordSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// How cleaning treats rows with missing skill cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Drop any row with a missing required cell (default).
    Drop,
    /// Keep rows with missing cells as NaN, to be filled later by an
    /// [`Imputer`] fitted on training rows only.
    Impute,
}

/// Named-column numeric matrix with an aligned target vector; the universal
/// dataset currency of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    feature_names: Vec<String>,
    matrix: Matrix,
    target: Vec<f64>,
    row_ids: Vec<String>,
}

impl FeatureTable {
    pub fn new(
        feature_names: Vec<String>,
        matrix: Matrix,
        target: Vec<f64>,
        row_ids: Vec<String>,
    ) -> Result<Self, DatasetError> {
        if matrix.n_rows() != target.len() || matrix.n_rows() != row_ids.len() {
            return Err(DatasetError::ShapeMismatch(format!(
                "{} matrix rows vs {} targets vs {} row ids",
                matrix.n_rows(),
                target.len(),
                row_ids.len()
            )));
        }
        if matrix.n_cols() != feature_names.len() {
            return Err(DatasetError::ShapeMismatch(format!(
                "{} matrix columns vs {} feature names",
                matrix.n_cols(),
                feature_names.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::DuplicateFeature(name.clone()));
            }
        }
        Ok(Self { feature_names, matrix, target, row_ids })
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.matrix.column(index)
    }

    pub fn has_missing(&self) -> bool {
        self.matrix.has_nan()
    }

    /// New table with the given rows, in the given order.
    pub fn subset_rows(&self, rows: &[usize]) -> FeatureTable {
        FeatureTable {
            feature_names: self.feature_names.clone(),
            matrix: self.matrix.select_rows(rows),
            target: rows.iter().map(|&r| self.target[r]).collect(),
            row_ids: rows.iter().map(|&r| self.row_ids[r].clone()).collect(),
        }
    }

    /// New table keeping only the named features, in the given order.
    pub fn select_features(&self, names: &[String]) -> Result<FeatureTable, DatasetError> {
        let mut cols = Vec::with_capacity(names.len());
        for name in names {
            let idx = self
                .feature_index(name)
                .ok_or_else(|| DatasetError::UnknownFeature { feature: name.clone() })?;
            cols.push(idx);
        }
        Ok(FeatureTable {
            feature_names: names.to_vec(),
            matrix: self.matrix.select_columns(&cols),
            target: self.target.clone(),
            row_ids: self.row_ids.clone(),
        })
    }

    /// Same rows and features with a replacement target vector.
    pub fn with_target(&self, target: Vec<f64>) -> Result<FeatureTable, DatasetError> {
        if target.len() != self.n_rows() {
            return Err(DatasetError::ShapeMismatch(format!(
                "{} targets for {} rows",
                target.len(),
                self.n_rows()
            )));
        }
        Ok(FeatureTable { target, ..self.clone() })
    }

    /// Writes the table as `name,<features...>,value`.
    pub fn write_csv(&self, path: &Path) -> Result<(), DatasetError> {
        let mut writer = csv::Writer::from_path(path).map_err(csv_io(path))?;
        let mut header = vec!["name".to_string()];
        header.extend(self.feature_names.iter().cloned());
        header.push("value".to_string());
        writer.write_record(&header)?;
        for r in 0..self.n_rows() {
            let mut rec = vec![self.row_ids[r].clone()];
            rec.extend(self.matrix.row(r).iter().map(|v| format_cell(*v)));
            rec.push(format_cell(self.target[r]));
            writer.write_record(&rec)?;
        }
        writer.flush().map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(())
    }

    /// Reads a table written by [`FeatureTable::write_csv`]: a `name` column,
    /// a `value` column, and every other column taken as a feature.
    pub fn read_csv(path: &Path) -> Result<FeatureTable, DatasetError> {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(false)
            .from_path(path)
            .map_err(|e| map_open_error(e, path))?;
        let header = reader.headers()?.clone();
        let name_idx = find_column(&header, "name")?;
        let value_idx = find_column(&header, "value")?;
        let feature_cols: Vec<(usize, String)> = header
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != name_idx && *i != value_idx)
            .map(|(i, h)| (i, h.to_string()))
            .collect();

        let mut row_ids = Vec::new();
        let mut target = Vec::new();
        let mut flat = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| map_row_error(e, row))?;
            row_ids.push(record[name_idx].to_string());
            let value = parse_cell(&record[value_idx]).ok_or_else(|| {
                DatasetError::MissingCell { row, column: "value".to_string() }
            })?;
            target.push(value);
            for (idx, column) in &feature_cols {
                let text = &record[*idx];
                if text.trim().is_empty() {
                    // Empty cells are missing values awaiting imputation.
                    flat.push(f64::NAN);
                    continue;
                }
                let cell = parse_cell(text).ok_or_else(|| {
                    DatasetError::MissingCell { row, column: column.clone() }
                })?;
                flat.push(cell);
            }
        }
        let n_rows = row_ids.len();
        let names: Vec<String> = feature_cols.into_iter().map(|(_, n)| n).collect();
        let n_cols = names.len();
        FeatureTable::new(names, Matrix::from_flat(flat, n_rows, n_cols), target, row_ids)
    }
}

/// Default cell formatting: integers render without a decimal point, which
/// keeps prepared files byte-stable and diff-friendly. Missing cells (NaN)
/// render empty.
fn format_cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn parse_cell(text: &str) -> Option<f64> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return None;
    }
    trimmed.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn valid_skill(cell: Option<f64>) -> Option<f64> {
    cell.filter(|v| (SKILL_RANGE.0..=SKILL_RANGE.1).contains(v))
}

fn find_column(header: &csv::StringRecord, name: &str) -> Result<usize, DatasetError> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| DatasetError::MissingColumn { column: name.to_string() })
}

fn csv_io(path: &Path) -> impl FnOnce(csv::Error) -> DatasetError + '_ {
    move |e| map_open_error(e, path)
}

fn map_open_error(e: csv::Error, path: &Path) -> DatasetError {
    if let csv::ErrorKind::Io(_) = e.kind() {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => {
                DatasetError::Io { path: path.display().to_string(), source }
            }
            _ => unreachable!(),
        }
    } else {
        DatasetError::Csv(e)
    }
}

fn map_row_error(e: csv::Error, row: usize) -> DatasetError {
    match e.kind() {
        csv::ErrorKind::UnequalLengths { .. } => DatasetError::MalformedRow { row },
        _ => DatasetError::Csv(e),
    }
}

/// Loads a player CSV. `required_columns` must all appear in the header;
/// skill columns absent from the file load as missing. Unparseable numeric
/// cells are recorded as missing, not errors.
pub fn load_csv(path: &Path, required_columns: &[&str]) -> Result<PlayerRecordSet, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| map_open_error(e, path))?;
    let header = reader.headers()?.clone();
    for column in required_columns {
        if !header.iter().any(|h| h == *column) {
            return Err(DatasetError::MissingColumn { column: column.to_string() });
        }
    }
    let col = |name: &str| header.iter().position(|h| h == name);
    let name_idx = find_column(&header, "name")?;
    let value_idx = col("value");
    let wage_idx = col("wage");
    let overall_idx = col("overall_rating");
    let potential_idx = col("potential");
    let outfield_idx: Vec<Option<usize>> = OUTFIELD_FEATURES.iter().map(|f| col(f)).collect();
    let gk_idx: Vec<Option<usize>> = GOALKEEPER_FEATURES.iter().map(|f| col(f)).collect();

    let mut parse_failures = 0usize;
    let mut take = |record: &csv::StringRecord, idx: Option<usize>| -> Option<f64> {
        let idx = idx?;
        let text = record.get(idx)?;
        if text.trim().is_empty() {
            return None;
        }
        let parsed = parse_cell(text);
        if parsed.is_none() {
            parse_failures += 1;
        }
        parsed
    };

    let mut records = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| map_row_error(e, row))?;
        let mut outfield = [None; 29];
        for (slot, idx) in outfield.iter_mut().zip(&outfield_idx) {
            *slot = take(&record, *idx);
        }
        let mut goalkeeper = [None; 5];
        for (slot, idx) in goalkeeper.iter_mut().zip(&gk_idx) {
            *slot = take(&record, *idx);
        }
        records.push(PlayerRecord {
            name: record.get(name_idx).unwrap_or("").to_string(),
            value: take(&record, value_idx),
            wage: take(&record, wage_idx),
            overall_rating: take(&record, overall_idx),
            potential: take(&record, potential_idx),
            outfield,
            goalkeeper,
        });
    }
    Ok(PlayerRecordSet { records, parse_failures })
}

/// Cleans a record set and partitions it into (outfield, goalkeeper) tables.
///
/// Rows without a positive market value are always dropped. A record routes
/// to the goalkeeper table iff all 5 goalkeeper attributes are present;
/// everything else is an outfield candidate. Under [`MissingPolicy::Drop`]
/// an outfield candidate additionally needs all 29 outfield cells (a
/// goalkeeper all 5 cells, which classification already guarantees); under
/// [`MissingPolicy::Impute`] rows with at least one observed skill cell are
/// kept with `NaN` holes for a downstream [`Imputer`]. Out-of-range skill
/// scores count as missing.
pub fn clean_and_partition(
    records: &PlayerRecordSet,
    policy: MissingPolicy,
) -> Result<(FeatureTable, FeatureTable), DatasetError> {
    let mut outfield_rows: Vec<(String, Vec<f64>, f64)> = Vec::new();
    let mut gk_rows: Vec<(String, Vec<f64>, f64)> = Vec::new();

    for record in &records.records {
        let value = match record.value {
            Some(v) if v > 0.0 => v,
            _ => continue,
        };
        if record.is_goalkeeper() {
            let cells: Vec<f64> =
                record.goalkeeper.iter().map(|c| valid_skill(*c).unwrap()).collect();
            gk_rows.push((record.name.clone(), cells, value));
        } else {
            let cells: Vec<Option<f64>> =
                record.outfield.iter().map(|c| valid_skill(*c)).collect();
            let present = cells.iter().filter(|c| c.is_some()).count();
            let keep = match policy {
                MissingPolicy::Drop => present == cells.len(),
                MissingPolicy::Impute => present > 0,
            };
            if keep {
                let cells: Vec<f64> =
                    cells.into_iter().map(|c| c.unwrap_or(f64::NAN)).collect();
                outfield_rows.push((record.name.clone(), cells, value));
            }
        }
    }

    if outfield_rows.is_empty() && gk_rows.is_empty() {
        return Err(DatasetError::EmptyResult);
    }
    let outfield = rows_to_table(&OUTFIELD_FEATURES, outfield_rows)?;
    let goalkeepers = rows_to_table(&GOALKEEPER_FEATURES, gk_rows)?;
    Ok((outfield, goalkeepers))
}

fn rows_to_table(
    features: &[&str],
    rows: Vec<(String, Vec<f64>, f64)>,
) -> Result<FeatureTable, DatasetError> {
    let n_rows = rows.len();
    let mut flat = Vec::with_capacity(n_rows * features.len());
    let mut target = Vec::with_capacity(n_rows);
    let mut row_ids = Vec::with_capacity(n_rows);
    for (name, cells, value) in rows {
        flat.extend_from_slice(&cells);
        target.push(value);
        row_ids.push(name);
    }
    FeatureTable::new(
        features.iter().map(|f| f.to_string()).collect(),
        Matrix::from_flat(flat, n_rows, features.len()),
        target,
        row_ids,
    )
}

/// Removes rows whose target strictly exceeds `threshold`; retained rows are
/// unchanged and keep their order.
pub fn cap_value(table: &FeatureTable, threshold: f64) -> FeatureTable {
    let keep: Vec<usize> =
        (0..table.n_rows()).filter(|&r| table.target()[r] <= threshold).collect();
    table.subset_rows(&keep)
}

/// A seeded train/test partition of a table.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: FeatureTable,
    pub test: FeatureTable,
    pub seed: u64,
}

/// Uniformly random row assignment under the seeded generator; row order
/// within each side follows the input table.
pub fn train_test_split(
    table: &FeatureTable,
    test_fraction: f64,
    seed: u64,
) -> Result<SplitPair, DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(test_fraction));
    }
    let n = table.n_rows();
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test >= n {
        return Err(DatasetError::DegenerateSplit { n_rows: n, n_test });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let mut test_rows: Vec<usize> = indices[..n_test].to_vec();
    let mut train_rows: Vec<usize> = indices[n_test..].to_vec();
    test_rows.sort_unstable();
    train_rows.sort_unstable();
    Ok(SplitPair {
        train: table.subset_rows(&train_rows),
        test: table.subset_rows(&test_rows),
        seed,
    })
}

/// Reads a feature matrix for prediction: every named feature must appear
/// as a column and every cell must hold a number. Row ids come from a
/// `name` column when present, otherwise the row index.
pub fn read_feature_matrix(
    path: &Path,
    features: &[String],
) -> Result<(Vec<String>, Matrix), DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| map_open_error(e, path))?;
    let header = reader.headers()?.clone();
    let name_idx = header.iter().position(|h| h == "name");
    let mut feature_idx = Vec::with_capacity(features.len());
    for feature in features {
        let idx = header.iter().position(|h| h == feature).ok_or_else(|| {
            DatasetError::MissingColumn { column: feature.clone() }
        })?;
        feature_idx.push(idx);
    }
    let mut row_ids = Vec::new();
    let mut flat = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| map_row_error(e, row))?;
        row_ids.push(match name_idx {
            Some(idx) => record[idx].to_string(),
            None => row.to_string(),
        });
        for (&idx, feature) in feature_idx.iter().zip(features) {
            let cell = parse_cell(&record[idx]).ok_or_else(|| DatasetError::MissingCell {
                row,
                column: feature.clone(),
            })?;
            flat.push(cell);
        }
    }
    let n_rows = row_ids.len();
    Ok((row_ids, Matrix::from_flat(flat, n_rows, features.len())))
}

/// Column-mean imputation, fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
}

impl Imputer {
    pub fn fit(table: &FeatureTable) -> Result<Imputer, DatasetError> {
        let mut means = Vec::with_capacity(table.n_features());
        for (j, name) in table.feature_names().iter().enumerate() {
            let column = table.column(j);
            let observed: Vec<f64> = column.into_iter().filter(|v| !v.is_nan()).collect();
            if observed.is_empty() {
                return Err(DatasetError::AllMissing { feature: name.clone() });
            }
            means.push(observed.iter().sum::<f64>() / observed.len() as f64);
        }
        Ok(Imputer { feature_names: table.feature_names().to_vec(), means })
    }

    /// Fills NaN cells with the fitted means. Feature names must match.
    pub fn apply(&self, table: &FeatureTable) -> Result<FeatureTable, DatasetError> {
        if table.feature_names() != self.feature_names.as_slice() {
            return Err(DatasetError::ShapeMismatch(
                "imputer fitted on different feature set".to_string(),
            ));
        }
        let mut matrix = table.matrix().clone();
        for r in 0..matrix.n_rows() {
            for c in 0..matrix.n_cols() {
                if matrix.get(r, c).is_nan() {
                    matrix.set(r, c, self.means[c]);
                }
            }
        }
        FeatureTable::new(
            table.feature_names().to_vec(),
            matrix,
            table.target().to_vec(),
            table.row_ids().to_vec(),
        )
    }
}
