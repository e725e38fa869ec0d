//! Versioned binary checkpoints of the Bayesian store.
//!
//! Layout: an 8-byte magic, a little-endian `u32` format version, a
//! length-prefixed JSON header with identifying metadata, then the four
//! tables (entity means, entity precisions, relation means, relation
//! precisions) as little-endian `f64` rows in id order. Tables are stored in
//! `f64` regardless of the training scalar, so reloading a checkpoint always
//! reproduces the same evaluation numbers.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CheckpointError;
use crate::scalar::Real;
use crate::store::{BayesianStore, GaussianTable, Hyperparameters, TableKind};
use crate::trainer::TrainOptions;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"CKGECKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Identifying metadata of a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    /// Snapshot the store was committed through.
    pub snapshot_index: usize,
    pub dim: usize,
    pub num_entities: usize,
    pub num_relations: usize,
    /// Hash of the vocabulary prefix known at `snapshot_index`; evaluation
    /// refuses datasets that disagree.
    pub vocab_hash: String,
    pub hyperparameters: Hyperparameters,
    pub options: TrainOptions,
}

/// A reloaded checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub entities: GaussianTable<f64>,
    pub relations: GaussianTable<f64>,
}

impl Checkpoint {
    /// Converts the stored tables into a live store of scalar type `T`.
    pub fn into_store<T: Real>(&self) -> Result<BayesianStore<T>, CheckpointError> {
        let convert = |table: &GaussianTable<f64>, kind: TableKind| {
            GaussianTable::from_raw(
                kind,
                table.dim(),
                table
                    .means()
                    .as_slice()
                    .iter()
                    .map(|&v| T::from_f64_lossy(v))
                    .collect(),
                table
                    .precisions()
                    .as_slice()
                    .iter()
                    .map(|&v| T::from_f64_lossy(v))
                    .collect(),
            )
            .map_err(|err| CheckpointError::Corrupt(err.to_string()))
        };
        Ok(BayesianStore {
            entities: convert(&self.entities, TableKind::Entity)?,
            relations: convert(&self.relations, TableKind::Relation)?,
        })
    }
}

/// Writes the store under the given metadata.
pub fn write_checkpoint<T: Real>(
    path: &Path,
    meta: &CheckpointMeta,
    store: &BayesianStore<T>,
) -> Result<(), CheckpointError> {
    if store.entities.len() != meta.num_entities
        || store.relations.len() != meta.num_relations
        || store.dim() != meta.dim
    {
        return Err(CheckpointError::Corrupt(
            "metadata does not match table shapes".into(),
        ));
    }
    let io_err = |source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);

    out.write_all(CHECKPOINT_MAGIC).map_err(io_err)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes()).map_err(io_err)?;
    let header = serde_json::to_vec(meta)
        .map_err(|err| CheckpointError::Corrupt(format!("header serialization: {err}")))?;
    out.write_all(&(header.len() as u32).to_le_bytes())
        .map_err(io_err)?;
    out.write_all(&header).map_err(io_err)?;

    for table in [&store.entities, &store.relations] {
        for values in [table.means().as_slice(), table.precisions().as_slice()] {
            for &value in values {
                out.write_all(&value.to_f64_lossy().to_le_bytes())
                    .map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)
}

/// Reads and validates a checkpoint file.
pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let io_err = |source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let mut input = BufReader::new(file);

    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(io_err)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic(path.to_path_buf()));
    }
    let version = read_u32(&mut input, path)?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let header_len = read_u32(&mut input, path)? as usize;
    let mut header = vec![0u8; header_len];
    input
        .read_exact(&mut header)
        .map_err(|_| CheckpointError::Corrupt("header truncated".into()))?;
    let meta: CheckpointMeta = serde_json::from_slice(&header)
        .map_err(|err| CheckpointError::Corrupt(format!("header: {err}")))?;

    let entity_components = meta.num_entities * meta.dim;
    let relation_components = meta.num_relations * meta.dim;
    let mut tables = Vec::with_capacity(4);
    for components in [
        entity_components,
        entity_components,
        relation_components,
        relation_components,
    ] {
        tables.push(read_f64_block(&mut input, components)?);
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing).map_err(io_err)? != 0 {
        return Err(CheckpointError::Corrupt("trailing bytes".into()));
    }

    let relation_precisions = tables.pop().unwrap();
    let relation_means = tables.pop().unwrap();
    let entity_precisions = tables.pop().unwrap();
    let entity_means = tables.pop().unwrap();
    let entities =
        GaussianTable::from_raw(TableKind::Entity, meta.dim, entity_means, entity_precisions)
            .map_err(|err| CheckpointError::Corrupt(err.to_string()))?;
    let relations = GaussianTable::from_raw(
        TableKind::Relation,
        meta.dim,
        relation_means,
        relation_precisions,
    )
    .map_err(|err| CheckpointError::Corrupt(err.to_string()))?;

    Ok(Checkpoint {
        meta,
        entities,
        relations,
    })
}

fn read_u32(input: &mut impl Read, path: &Path) -> Result<u32, CheckpointError> {
    let mut bytes = [0u8; 4];
    input.read_exact(&mut bytes).map_err(|source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(u32::from_le_bytes(bytes))
}

fn read_f64_block(input: &mut impl Read, components: usize) -> Result<Vec<f64>, CheckpointError> {
    let mut bytes = vec![0u8; components * 8];
    input
        .read_exact(&mut bytes)
        .map_err(|_| CheckpointError::Corrupt("table block truncated".into()))?;
    Ok(bytes
        .chunks_exact(8)
        .map(|chunk| f64::from_le_bytes(chunk.try_into().unwrap()))
        .collect())
}
