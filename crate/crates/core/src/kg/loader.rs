use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::DataError;
use crate::kg::{Snapshot, SnapshotSequence, Triple, Vocabulary};

/// Loader behavior switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoaderOptions {
    /// When set, a relation first appearing after snapshot 0 is an error
    /// instead of being interned like an entity.
    pub strict_relations: bool,
}

/// Loads a snapshot corpus laid out as `root/snapshot_{i}/{train,valid,test}.txt`
/// with default options.
pub fn load_snapshot_sequence(root: &Path) -> Result<SnapshotSequence, DataError> {
    load_snapshot_sequence_with(root, LoaderOptions::default())
}

/// Loads a snapshot corpus.
///
/// Snapshot directories are consumed in index order starting at
/// `snapshot_0`; the first missing index ends the sequence. Each triple file
/// holds one `head\trelation\ttail` per line. Symbols are interned in
/// first-seen order unless `root/entity2id.txt` and `root/relation2id.txt`
/// provide explicit `name\tid` assignments, which are honored when they are
/// dense and consistent with first-seen ordering. Duplicate lines within one
/// file are dropped with a warning.
pub fn load_snapshot_sequence_with(
    root: &Path,
    options: LoaderOptions,
) -> Result<SnapshotSequence, DataError> {
    if !root.is_dir() {
        return Err(DataError::Missing(root.to_path_buf()));
    }
    if !root.join("snapshot_0").is_dir() {
        return Err(DataError::Missing(root.join("snapshot_0")));
    }

    let pinned = PinnedIds::load(root)?;
    let mut vocab = Vocabulary::new();
    let mut snapshots = Vec::new();

    for index in 0.. {
        let dir = root.join(format!("snapshot_{index}"));
        if !dir.is_dir() {
            break;
        }
        let train = read_split(&dir.join("train.txt"), index, &mut vocab, &pinned, &options)?;
        let valid = read_split(&dir.join("valid.txt"), index, &mut vocab, &pinned, &options)?;
        let test = read_split(&dir.join("test.txt"), index, &mut vocab, &pinned, &options)?;
        vocab.seal_snapshot(index);
        snapshots.push(Snapshot {
            index,
            num_entities: vocab.entities_at(index),
            num_relations: vocab.relations_at(index),
            train,
            valid,
            test,
        });
    }

    pinned.check_fully_used(&vocab)?;
    let sequence = SnapshotSequence { vocab, snapshots };
    sequence.validate()?;
    Ok(sequence)
}

fn read_split(
    path: &Path,
    snapshot: usize,
    vocab: &mut Vocabulary,
    pinned: &PinnedIds,
    options: &LoaderOptions,
) -> Result<Vec<Triple>, DataError> {
    let file = fs::File::open(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DataError::Missing(path.to_path_buf())
        } else {
            DataError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let reader = BufReader::new(file);

    let mut triples = Vec::new();
    let mut seen = HashSet::new();
    let mut duplicates = 0usize;
    for (line_index, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (head, relation, tail) = match (fields.next(), fields.next(), fields.next()) {
            (Some(h), Some(r), Some(t)) if fields.next().is_none() => (h, r, t),
            _ => {
                return Err(DataError::Malformed {
                    path: path.to_path_buf(),
                    line: line_index + 1,
                    message: "expected 3 tab-separated fields".into(),
                });
            }
        };

        let head = intern_entity(vocab, pinned, head, snapshot, path, line_index + 1)?;
        let tail = intern_entity(vocab, pinned, tail, snapshot, path, line_index + 1)?;
        let relation = intern_relation(vocab, pinned, relation, snapshot, path, line_index + 1)?;
        if options.strict_relations && snapshot > 0 {
            if let Some(first) = vocab.relation_first_seen(relation) {
                if first == snapshot && first > 0 {
                    return Err(DataError::LateRelation {
                        snapshot,
                        name: vocab.relation_name(relation).unwrap_or_default().to_owned(),
                    });
                }
            }
        }

        let triple = Triple::new(head, relation, tail);
        if seen.insert(triple) {
            triples.push(triple);
        } else {
            duplicates += 1;
        }
    }
    if duplicates > 0 {
        warn!("{}: dropped {duplicates} duplicate triples", path.display());
    }
    Ok(triples)
}

fn intern_entity(
    vocab: &mut Vocabulary,
    pinned: &PinnedIds,
    name: &str,
    snapshot: usize,
    path: &Path,
    line: usize,
) -> Result<u32, DataError> {
    if pinned.entities.is_some() && vocab.entity_id(name).is_none() {
        pinned.check_entity(name, vocab.num_entities(), path, line)?;
    }
    Ok(vocab.intern_entity(name, snapshot))
}

fn intern_relation(
    vocab: &mut Vocabulary,
    pinned: &PinnedIds,
    name: &str,
    snapshot: usize,
    path: &Path,
    line: usize,
) -> Result<u32, DataError> {
    if pinned.relations.is_some() && vocab.relation_id(name).is_none() {
        pinned.check_relation(name, vocab.num_relations(), path, line)?;
    }
    Ok(vocab.intern_relation(name, snapshot))
}

/// Optional explicit id assignments from `entity2id.txt` / `relation2id.txt`.
///
/// First-seen interning must reproduce the pinned ids exactly, otherwise the
/// prefix property of the id space would silently break; any disagreement is
/// reported as a data error rather than remapped.
struct PinnedIds {
    entities: Option<IdMap>,
    relations: Option<IdMap>,
}

struct IdMap {
    path: PathBuf,
    by_name: std::collections::HashMap<String, u32>,
}

impl PinnedIds {
    fn load(root: &Path) -> Result<Self, DataError> {
        Ok(PinnedIds {
            entities: IdMap::load(&root.join("entity2id.txt"))?,
            relations: IdMap::load(&root.join("relation2id.txt"))?,
        })
    }

    fn check_entity(
        &self,
        name: &str,
        next_id: usize,
        path: &Path,
        line: usize,
    ) -> Result<(), DataError> {
        if let Some(map) = &self.entities {
            map.check(name, next_id, path, line)?;
        }
        Ok(())
    }

    fn check_relation(
        &self,
        name: &str,
        next_id: usize,
        path: &Path,
        line: usize,
    ) -> Result<(), DataError> {
        if let Some(map) = &self.relations {
            map.check(name, next_id, path, line)?;
        }
        Ok(())
    }

    /// A pinned symbol that never occurs in any snapshot file would leave a
    /// hole in the id space, so it is rejected.
    fn check_fully_used(&self, vocab: &Vocabulary) -> Result<(), DataError> {
        if let Some(map) = &self.entities {
            if map.by_name.len() != vocab.num_entities() {
                return Err(DataError::BadIdFile {
                    path: map.path.clone(),
                    count: vocab.num_entities(),
                });
            }
        }
        if let Some(map) = &self.relations {
            if map.by_name.len() != vocab.num_relations() {
                return Err(DataError::BadIdFile {
                    path: map.path.clone(),
                    count: vocab.num_relations(),
                });
            }
        }
        Ok(())
    }
}

impl IdMap {
    fn load(path: &Path) -> Result<Option<Self>, DataError> {
        let file = match fs::File::open(path) {
            Ok(file) => file,
            Err(source) if source.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(source) => {
                return Err(DataError::Io {
                    path: path.to_path_buf(),
                    source,
                })
            }
        };
        let mut by_name = std::collections::HashMap::new();
        let mut ids = HashSet::new();
        for (line_index, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| DataError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.is_empty() {
                continue;
            }
            let (name, id) = line.split_once('\t').ok_or_else(|| DataError::Malformed {
                path: path.to_path_buf(),
                line: line_index + 1,
                message: "expected name\\tid".into(),
            })?;
            let id: u32 = id.parse().map_err(|_| DataError::Malformed {
                path: path.to_path_buf(),
                line: line_index + 1,
                message: format!("'{id}' is not an id"),
            })?;
            if by_name.insert(name.to_owned(), id).is_some() || !ids.insert(id) {
                return Err(DataError::Malformed {
                    path: path.to_path_buf(),
                    line: line_index + 1,
                    message: "duplicate name or id".into(),
                });
            }
        }
        let dense = (0..by_name.len() as u32).all(|id| ids.contains(&id));
        if !dense {
            return Err(DataError::BadIdFile {
                path: path.to_path_buf(),
                count: by_name.len(),
            });
        }
        Ok(Some(IdMap {
            path: path.to_path_buf(),
            by_name,
        }))
    }

    /// The symbol is about to be interned as `next_id`; the pinned id must
    /// agree, which also enforces first-seen ordering.
    fn check(&self, name: &str, next_id: usize, path: &Path, line: usize) -> Result<(), DataError> {
        match self.by_name.get(name) {
            Some(&pinned) if pinned as usize == next_id => Ok(()),
            Some(&pinned) => Err(DataError::Malformed {
                path: path.to_path_buf(),
                line,
                message: format!(
                    "'{name}' is pinned to id {pinned} but appears in position {next_id}; \
                     pinned ids must follow first-seen order"
                ),
            }),
            None => Err(DataError::Malformed {
                path: path.to_path_buf(),
                line,
                message: format!("'{name}' is missing from {}", self.path.display()),
            }),
        }
    }
}
