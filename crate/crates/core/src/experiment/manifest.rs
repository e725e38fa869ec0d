//! Run directory manifest: what was produced, and its content hashes.
//!
//! Every artifact a run writes is listed with a SHA-256 digest, so a
//! checkpoint can be verified before reuse and two runs can be compared by
//! their manifests alone. The manifest deliberately records no timestamps;
//! a repeated run must produce identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CheckpointError, Error};

pub const MANIFEST_FILE: &str = "manifest.json";

/// One artifact file, relative to the run directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

/// Inventory of a run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// Base seed of the run.
    pub seed: u64,
    /// How many snapshots finished training and evaluation.
    pub snapshots_completed: usize,
    /// Set when the snapshot loop aborted; names the failure.
    pub failure: Option<String>,
    /// All artifacts, sorted by path.
    pub artifacts: Vec<ManifestEntry>,
}

/// Hex SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> Result<String, Error> {
    let bytes = fs::read(path).map_err(|source| {
        Error::Checkpoint(CheckpointError::Io {
            path: path.to_path_buf(),
            source,
        })
    })?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

impl Manifest {
    /// Hashes the named files under `dir` into a manifest.
    pub fn collect(
        dir: &Path,
        seed: u64,
        snapshots_completed: usize,
        failure: Option<String>,
        files: &[String],
    ) -> Result<Self, Error> {
        let mut artifacts = Vec::with_capacity(files.len());
        for file in files {
            artifacts.push(ManifestEntry {
                path: file.clone(),
                sha256: sha256_file(&dir.join(file))?,
            });
        }
        artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(Manifest {
            seed,
            snapshots_completed,
            failure,
            artifacts,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<(), Error> {
        let path = dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self)
            .map_err(|err| Error::Config(format!("manifest serialization: {err}")))?;
        fs::write(&path, json + "\n").map_err(|source| {
            Error::Checkpoint(CheckpointError::Io { path, source })
        })
    }

    pub fn read(dir: &Path) -> Result<Self, Error> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|source| {
            Error::Checkpoint(CheckpointError::Io {
                path: path.clone(),
                source,
            })
        })?;
        serde_json::from_str(&text).map_err(|err| {
            Error::Checkpoint(CheckpointError::Corrupt(format!(
                "{}: {err}",
                path.display()
            )))
        })
    }

    /// Recomputes the hash of one listed artifact and compares.
    pub fn verify_file(&self, dir: &Path, file: &str) -> Result<(), Error> {
        let entry = self
            .artifacts
            .iter()
            .find(|entry| entry.path == file)
            .ok_or_else(|| {
                Error::Checkpoint(CheckpointError::ManifestMismatch {
                    path: dir.join(file),
                    detail: "not listed in the manifest".into(),
                })
            })?;
        let actual = sha256_file(&dir.join(file))?;
        if actual != entry.sha256 {
            return Err(Error::Checkpoint(CheckpointError::ManifestMismatch {
                path: dir.join(file),
                detail: format!("hash {actual} does not match recorded {}", entry.sha256),
            }));
        }
        Ok(())
    }

    /// Verifies every listed artifact.
    pub fn verify_all(&self, dir: &Path) -> Result<(), Error> {
        for entry in &self.artifacts {
            self.verify_file(dir, &entry.path)?;
        }
        Ok(())
    }
}

/// Checks `file` in `dir` against the manifest, if one exists.
///
/// A missing manifest is accepted so that a checkpoint copied out of its run
/// directory stays usable; a present manifest must list and match the file.
pub fn verify_against_manifest_if_present(dir: &Path, file: &str) -> Result<(), Error> {
    if !dir.join(MANIFEST_FILE).exists() {
        return Ok(());
    }
    Manifest::read(dir)?.verify_file(dir, file)
}
