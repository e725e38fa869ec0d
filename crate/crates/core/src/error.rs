//! Error types for the whole engine.
//!
//! Errors are grouped by pipeline stage. The umbrella [`Error`] carries a
//! process exit code so the CLI can distinguish configuration mistakes, data
//! problems and numeric failures without inspecting variants.

use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Which loss term produced a non-finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossTerm {
    /// Margin ranking loss over triples.
    Kge,
    /// Quadratic pull toward the carried-over posterior.
    Bayes,
    /// Contrastive clustering loss.
    Fcc,
}

impl fmt::Display for LossTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossTerm::Kge => write!(f, "ranking loss"),
            LossTerm::Bayes => write!(f, "posterior regularizer"),
            LossTerm::Fcc => write!(f, "clustering loss"),
        }
    }
}

/// Problems with snapshot corpora on disk or with their internal consistency.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing file or directory: {0}")]
    Missing(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("snapshot {snapshot}: relation '{name}' first appears after the base snapshot, which strict mode forbids")]
    LateRelation { snapshot: usize, name: String },
    #[error("snapshot {snapshot}: entity or relation set shrank relative to its predecessor")]
    NonMonotone { snapshot: usize },
    #[error("{path}: ids must densely cover 0..{count} in first-seen order")]
    BadIdFile { path: PathBuf, count: usize },
    #[error("snapshot 0 has no predecessor to diff against")]
    NoPredecessor,
    #[error("snapshot index {index} out of range, sequence has {len} snapshots")]
    SnapshotOutOfRange { index: usize, len: usize },
    #[error("synthetic spec infeasible: {0}")]
    InfeasibleSpec(String),
}

/// Violations of model-side contracts: table shapes, precisions, clusters.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("new ids must extend the table contiguously: table holds {len} rows, got id {id}")]
    NonContiguousId { len: usize, id: u32 },
    #[error("observation precision must be non-negative, got {0}")]
    NegativeObservationPrecision(f64),
    #[error("prior precision must stay positive, found a violation at component {component}")]
    NonPositivePrecision { component: usize },
    #[error("{term} became non-finite at snapshot {snapshot}, epoch {epoch}")]
    NonFinite {
        term: LossTerm,
        snapshot: usize,
        epoch: usize,
    },
    #[error("centrality needs at least two entities")]
    TooFewEntities,
    #[error("entity {0} has no cluster assignment")]
    Unassigned(u32),
    #[error("no cluster has an initialized centroid")]
    NoActiveCentroid,
    #[error("invalid hyperparameter: {0}")]
    BadHyper(String),
}

/// Evaluation-time contract violations.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("gold entity {id} is outside the candidate set")]
    GoldMissing { id: u32 },
}

/// Checkpoint serialization and verification failures.
#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} is not a checkpoint file")]
    BadMagic(PathBuf),
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint file is truncated or corrupt: {0}")]
    Corrupt(String),
    #[error("vocabulary hash mismatch: checkpoint was built for {expected}, dataset yields {got}")]
    VocabMismatch { expected: String, got: String },
    #[error("manifest check failed for {path}: {detail}")]
    ManifestMismatch { path: PathBuf, detail: String },
}

/// Umbrella error for pipeline entry points and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

impl Error {
    /// Process exit code: 2 config, 3 data, 4 numeric or model failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) | Error::Checkpoint(_) => 3,
            Error::Model(_) | Error::Eval(_) => 4,
        }
    }
}
