//! Run manifest: per-stage config snapshot, artifact checksums, timings,
//! and the software version. Timings live only here, so every other emitted
//! file stays byte-reproducible for a fixed seed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::errors::{internal, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub software: String,
    pub stages: BTreeMap<String, StageRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StageRecord {
    pub seed: u64,
    pub duration_ms: u128,
    pub config: serde_json::Value,
    /// Artifact path (relative to the output directory) to SHA-256 hex.
    pub artifacts: BTreeMap<String, String>,
}

pub fn sha256_hex(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(internal)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Records one finished stage, merging into any existing manifest.
pub fn record_stage(
    out_dir: &Path,
    stage: &str,
    seed: u64,
    config: serde_json::Value,
    duration: Duration,
    artifacts: &[PathBuf],
) -> CliResult<()> {
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let mut manifest: Manifest = match std::fs::read_to_string(&manifest_path) {
        Ok(text) => serde_json::from_str(&text).unwrap_or_default(),
        Err(_) => Manifest::default(),
    };
    manifest.software = format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));

    let mut checksums = BTreeMap::new();
    for artifact in artifacts {
        let relative = artifact
            .strip_prefix(out_dir)
            .unwrap_or(artifact)
            .to_string_lossy()
            .into_owned();
        checksums.insert(relative, sha256_hex(artifact)?);
    }
    manifest.stages.insert(
        stage.to_string(),
        StageRecord { seed, duration_ms: duration.as_millis(), config, artifacts: checksums },
    );
    let mut text = serde_json::to_string_pretty(&manifest).map_err(internal)?;
    text.push('\n');
    std::fs::write(&manifest_path, text).map_err(internal)?;
    Ok(())
}
