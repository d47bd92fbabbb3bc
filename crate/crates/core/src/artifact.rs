//! Versioned, human-inspectable model artifact: the fitted ensemble as a
//! node dump plus the metadata needed to reproduce predictions end to end
//! (feature list, Box-Cox parameters, seed).
//!
//! Serialization is pretty-printed JSON with a fixed field order, so a rerun
//! with the same config and seed writes byte-identical files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transform::BoxCoxParams;
use crate::trees::{FittedModel, RegressionTree, TreesError};

/// Current artifact schema version.
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("artifact is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("artifact version {found} unsupported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("artifact failed validation: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub version: u32,
    /// Producing package and version, e.g. `playerval 0.1.0`.
    pub created_by: String,
    pub seed: u64,
    pub feature_names: Vec<String>,
    pub boxcox: Option<BoxCoxParams>,
    pub model: FittedModel,
}

impl ModelArtifact {
    pub fn new(
        model: FittedModel,
        feature_names: Vec<String>,
        boxcox: Option<BoxCoxParams>,
        seed: u64,
    ) -> Self {
        Self {
            version: ARTIFACT_VERSION,
            created_by: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            seed,
            feature_names,
            boxcox,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("artifact serializes");
        text.push('\n');
        text
    }

    pub fn save(&self, path: &Path) -> Result<(), ArtifactError> {
        std::fs::write(path, self.to_json())
            .map_err(|source| ArtifactError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ArtifactError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ArtifactError::Io { path: path.display().to_string(), source })?;
        let artifact: ModelArtifact = serde_json::from_str(&text)?;
        if artifact.version != ARTIFACT_VERSION {
            return Err(ArtifactError::Version {
                found: artifact.version,
                expected: ARTIFACT_VERSION,
            });
        }
        artifact.validate()?;
        Ok(artifact)
    }

    /// Structural checks on a deserialized artifact: feature list matches
    /// the model width and every tree passes cover bookkeeping.
    pub fn validate(&self) -> Result<(), ArtifactError> {
        if self.feature_names.len() != self.model.n_features() {
            return Err(ArtifactError::Invalid(format!(
                "{} feature names for a model with {} features",
                self.feature_names.len(),
                self.model.n_features()
            )));
        }
        let trees: &[RegressionTree] = match &self.model {
            FittedModel::Gbdt(m) => &m.trees,
            FittedModel::Forest(m) => &m.trees,
        };
        for (i, tree) in trees.iter().enumerate() {
            RegressionTree::from_nodes(tree.nodes().to_vec(), tree.n_features())
                .map_err(|e: TreesError| ArtifactError::Invalid(format!("tree {i}: {e}")))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::trees::{fit_gbdt, GbdtParams};

    fn fitted() -> (FittedModel, Matrix) {
        let x = Matrix::from_rows(
            &(0..30).map(|i| vec![(i as f64 * 0.7).sin(), i as f64]).collect::<Vec<_>>(),
        );
        let y: Vec<f64> = (0..30).map(|i| i as f64 * 0.4 + 1.0).collect();
        let params = GbdtParams { n_estimators: 8, ..Default::default() };
        (FittedModel::Gbdt(fit_gbdt(&x, &y, &params, 2).unwrap()), x)
    }

    #[test]
    fn save_load_roundtrip_preserves_predictions() {
        let (model, x) = fitted();
        let artifact = ModelArtifact::new(
            model,
            vec!["a".into(), "b".into()],
            Some(BoxCoxParams { lambda: 0.2, shift: 0.0, log_likelihood: -3.0 }),
            42,
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        artifact.save(&path).unwrap();
        let loaded = ModelArtifact::load(&path).unwrap();
        assert_eq!(artifact, loaded);
        assert_eq!(artifact.model.predict(&x).unwrap(), loaded.model.predict(&x).unwrap());

        // Byte-identical rewrite.
        let again = dir.path().join("model2.json");
        loaded.save(&again).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }

    #[test]
    fn version_and_validation_errors() {
        let (model, _) = fitted();
        let artifact = ModelArtifact::new(model, vec!["a".into(), "b".into()], None, 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");

        let mut wrong_version = artifact.clone();
        wrong_version.version = 99;
        wrong_version.save(&path).unwrap();
        assert!(matches!(
            ModelArtifact::load(&path),
            Err(ArtifactError::Version { found: 99, expected: 1 })
        ));

        let mut wrong_names = artifact.clone();
        wrong_names.feature_names.push("extra".into());
        assert!(matches!(wrong_names.validate(), Err(ArtifactError::Invalid(_))));

        // Tampered cover fails structural validation on load.
        let text = artifact.to_json().replace("\"cover\": 30.0", "\"cover\": -30.0");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(ModelArtifact::load(&path), Err(ArtifactError::Invalid(_))));
    }
}
