use std::collections::HashSet;
use std::ops::Range;

use serde::Serialize;

use crate::error::DataError;
use crate::kg::{Triple, Vocabulary};

/// One snapshot: the triples that are new at this step, split three ways,
/// plus the cumulative symbol counts once the step is absorbed.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub index: usize,
    /// Entities known after this snapshot, i.e. ids `0..num_entities`.
    pub num_entities: usize,
    /// Relations known after this snapshot.
    pub num_relations: usize,
    pub train: Vec<Triple>,
    pub valid: Vec<Triple>,
    pub test: Vec<Triple>,
}

impl Snapshot {
    /// Triples introduced by this snapshot, across all three splits.
    pub fn all_triples(&self) -> impl Iterator<Item = &Triple> {
        self.train.iter().chain(&self.valid).chain(&self.test)
    }

    pub fn triple_count(&self) -> usize {
        self.train.len() + self.valid.len() + self.test.len()
    }
}

/// Headline counts for one snapshot, used for corpus audits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SnapshotStats {
    pub snapshot: usize,
    pub num_entities: usize,
    pub num_relations: usize,
    pub num_triples: usize,
}

/// A full growing corpus: the shared vocabulary and the snapshots in order.
#[derive(Debug, Clone)]
pub struct SnapshotSequence {
    pub vocab: Vocabulary,
    pub snapshots: Vec<Snapshot>,
}

impl SnapshotSequence {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    fn check_index(&self, index: usize) -> Result<(), DataError> {
        if index >= self.len() {
            return Err(DataError::SnapshotOutOfRange {
                index,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// Ids of entities first seen at snapshot `t`. First-seen ordering makes
    /// this a contiguous range at the top of the id space known at `t`.
    pub fn new_entities(&self, t: usize) -> Range<u32> {
        let lo = if t == 0 {
            0
        } else {
            self.snapshots[t - 1].num_entities as u32
        };
        lo..self.snapshots[t].num_entities as u32
    }

    /// Ids of relations first seen at snapshot `t`.
    pub fn new_relations(&self, t: usize) -> Range<u32> {
        let lo = if t == 0 {
            0
        } else {
            self.snapshots[t - 1].num_relations as u32
        };
        lo..self.snapshots[t].num_relations as u32
    }

    /// What snapshot `t` adds over snapshot `t - 1`: the entity ids that are
    /// new and the triples that are new. Snapshot 0 has no predecessor.
    pub fn delta_sets(&self, t: usize) -> Result<(Vec<u32>, Vec<Triple>), DataError> {
        if t == 0 {
            return Err(DataError::NoPredecessor);
        }
        self.check_index(t)?;
        let entities = self.new_entities(t).collect();
        let triples = self.snapshots[t].all_triples().copied().collect();
        Ok((entities, triples))
    }

    /// Training triples of snapshots `0..=t`, in snapshot order.
    pub fn cumulative_train(&self, t: usize) -> Vec<Triple> {
        self.snapshots[..=t]
            .iter()
            .flat_map(|s| s.train.iter().copied())
            .collect()
    }

    /// Set of all triples, every split, of snapshots `0..=t`. This is the
    /// filter used by link-prediction evaluation and negative sampling.
    pub fn cumulative_triples(&self, t: usize) -> HashSet<Triple> {
        self.snapshots[..=t]
            .iter()
            .flat_map(|s| s.all_triples().copied())
            .collect()
    }

    /// Set of training triples of snapshots `0..=t`.
    pub fn cumulative_train_set(&self, t: usize) -> HashSet<Triple> {
        self.cumulative_train(t).into_iter().collect()
    }

    /// Per-snapshot audit counts: cumulative entities and relations, delta
    /// triples.
    pub fn stats(&self) -> Vec<SnapshotStats> {
        self.snapshots
            .iter()
            .map(|s| SnapshotStats {
                snapshot: s.index,
                num_entities: s.num_entities,
                num_relations: s.num_relations,
                num_triples: s.triple_count(),
            })
            .collect()
    }

    /// Checks the structural invariants of a sequence: indices are `0..n`,
    /// symbol counts never shrink, every triple only references ids known at
    /// its snapshot, and the vocabulary itself is well formed.
    pub fn validate(&self) -> Result<(), DataError> {
        self.vocab.validate()?;
        let mut prev_entities = 0usize;
        let mut prev_relations = 0usize;
        for (i, snap) in self.snapshots.iter().enumerate() {
            if snap.index != i {
                return Err(DataError::SnapshotOutOfRange {
                    index: snap.index,
                    len: self.len(),
                });
            }
            if snap.num_entities < prev_entities || snap.num_relations < prev_relations {
                return Err(DataError::NonMonotone { snapshot: i });
            }
            for triple in snap.all_triples() {
                let ids_known = (triple.head as usize) < snap.num_entities
                    && (triple.tail as usize) < snap.num_entities
                    && (triple.relation as usize) < snap.num_relations;
                if !ids_known {
                    return Err(DataError::Malformed {
                        path: format!("snapshot_{i}").into(),
                        line: 0,
                        message: format!(
                            "triple ({}, {}, {}) references ids unknown at snapshot {i}",
                            triple.head, triple.relation, triple.tail
                        ),
                    });
                }
            }
            prev_entities = snap.num_entities;
            prev_relations = snap.num_relations;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_step_sequence() -> SnapshotSequence {
        let mut vocab = Vocabulary::new();
        for name in ["a", "b"] {
            vocab.intern_entity(name, 0);
        }
        vocab.intern_relation("r", 0);
        vocab.seal_snapshot(0);
        vocab.intern_entity("c", 1);
        vocab.seal_snapshot(1);
        SnapshotSequence {
            vocab,
            snapshots: vec![
                Snapshot {
                    index: 0,
                    num_entities: 2,
                    num_relations: 1,
                    train: vec![Triple::new(0, 0, 1)],
                    valid: vec![],
                    test: vec![],
                },
                Snapshot {
                    index: 1,
                    num_entities: 3,
                    num_relations: 1,
                    train: vec![Triple::new(1, 0, 2)],
                    valid: vec![],
                    test: vec![Triple::new(0, 0, 2)],
                },
            ],
        }
    }

    #[test]
    fn delta_sets_report_new_ids_and_new_triples() {
        let seq = two_step_sequence();
        let (entities, triples) = seq.delta_sets(1).unwrap();
        assert_eq!(entities, vec![2]);
        assert_eq!(triples, vec![Triple::new(1, 0, 2), Triple::new(0, 0, 2)]);
    }

    #[test]
    fn snapshot_zero_has_no_delta() {
        let seq = two_step_sequence();
        assert!(matches!(seq.delta_sets(0), Err(DataError::NoPredecessor)));
    }

    #[test]
    fn cumulative_views_union_over_prefixes() {
        let seq = two_step_sequence();
        assert_eq!(seq.cumulative_train(0).len(), 1);
        assert_eq!(seq.cumulative_train(1).len(), 2);
        assert_eq!(seq.cumulative_triples(1).len(), 3);
    }

    #[test]
    fn validation_rejects_out_of_range_ids() {
        let mut seq = two_step_sequence();
        seq.snapshots[0].train.push(Triple::new(5, 0, 0));
        assert!(seq.validate().is_err());
    }

    #[test]
    fn validation_accepts_the_well_formed_sequence() {
        assert!(two_step_sequence().validate().is_ok());
    }
}
