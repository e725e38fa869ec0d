use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::DataError;
use crate::kg::{SnapshotSequence, Triple};

/// Writes a sequence back to the `snapshot_{i}/{train,valid,test}.txt` layout.
///
/// Triples are written in stored order with names resolved through the
/// vocabulary, so writing what the loader produced reproduces a deduplicated
/// corpus byte for byte.
pub fn write_snapshot_sequence(
    sequence: &SnapshotSequence,
    root: &Path,
) -> Result<(), DataError> {
    for snapshot in &sequence.snapshots {
        let dir = root.join(format!("snapshot_{}", snapshot.index));
        fs::create_dir_all(&dir).map_err(|source| DataError::Io {
            path: dir.clone(),
            source,
        })?;
        write_split(sequence, &snapshot.train, &dir.join("train.txt"))?;
        write_split(sequence, &snapshot.valid, &dir.join("valid.txt"))?;
        write_split(sequence, &snapshot.test, &dir.join("test.txt"))?;
    }
    Ok(())
}

fn write_split(
    sequence: &SnapshotSequence,
    triples: &[Triple],
    path: &Path,
) -> Result<(), DataError> {
    let io_err = |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    for triple in triples {
        let head = sequence.vocab.entity_name(triple.head);
        let relation = sequence.vocab.relation_name(triple.relation);
        let tail = sequence.vocab.entity_name(triple.tail);
        let (head, relation, tail) = match (head, relation, tail) {
            (Some(h), Some(r), Some(t)) => (h, r, t),
            _ => {
                return Err(DataError::Malformed {
                    path: path.to_path_buf(),
                    line: 0,
                    message: format!(
                        "triple ({}, {}, {}) references unnamed ids",
                        triple.head, triple.relation, triple.tail
                    ),
                })
            }
        };
        writeln!(out, "{head}\t{relation}\t{tail}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
