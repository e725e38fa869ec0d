use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::error::DataError;

/// Bidirectional name/id mapping for entities and relations, with the
/// snapshot at which each symbol first appeared.
///
/// Ids are dense and assigned in first-seen order: every id first seen at
/// snapshot `t` is strictly greater than every id first seen earlier. The
/// cumulative counts recorded by [`Vocabulary::seal_snapshot`] therefore
/// describe prefixes of the id space.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    entity_names: Vec<String>,
    entity_ids: HashMap<String, u32>,
    entity_first_seen: Vec<usize>,
    relation_names: Vec<String>,
    relation_ids: HashMap<String, u32>,
    relation_first_seen: Vec<usize>,
    entities_by_snapshot: Vec<usize>,
    relations_by_snapshot: Vec<usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Vocabulary::default()
    }

    /// Returns the id for `name`, interning it with `first_seen = snapshot`
    /// if it is new.
    pub fn intern_entity(&mut self, name: &str, snapshot: usize) -> u32 {
        if let Some(&id) = self.entity_ids.get(name) {
            return id;
        }
        let id = self.entity_names.len() as u32;
        self.entity_names.push(name.to_owned());
        self.entity_ids.insert(name.to_owned(), id);
        self.entity_first_seen.push(snapshot);
        id
    }

    /// Returns the id for `name`, interning it with `first_seen = snapshot`
    /// if it is new.
    pub fn intern_relation(&mut self, name: &str, snapshot: usize) -> u32 {
        if let Some(&id) = self.relation_ids.get(name) {
            return id;
        }
        let id = self.relation_names.len() as u32;
        self.relation_names.push(name.to_owned());
        self.relation_ids.insert(name.to_owned(), id);
        self.relation_first_seen.push(snapshot);
        id
    }

    pub fn entity_id(&self, name: &str) -> Option<u32> {
        self.entity_ids.get(name).copied()
    }

    pub fn relation_id(&self, name: &str) -> Option<u32> {
        self.relation_ids.get(name).copied()
    }

    pub fn entity_name(&self, id: u32) -> Option<&str> {
        self.entity_names.get(id as usize).map(String::as_str)
    }

    pub fn relation_name(&self, id: u32) -> Option<&str> {
        self.relation_names.get(id as usize).map(String::as_str)
    }

    pub fn num_entities(&self) -> usize {
        self.entity_names.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relation_names.len()
    }

    pub fn entity_first_seen(&self, id: u32) -> Option<usize> {
        self.entity_first_seen.get(id as usize).copied()
    }

    pub fn relation_first_seen(&self, id: u32) -> Option<usize> {
        self.relation_first_seen.get(id as usize).copied()
    }

    /// Records the cumulative entity and relation counts for one snapshot.
    /// Must be called once per snapshot, in order.
    pub fn seal_snapshot(&mut self, snapshot: usize) {
        debug_assert_eq!(snapshot, self.entities_by_snapshot.len());
        self.entities_by_snapshot.push(self.entity_names.len());
        self.relations_by_snapshot.push(self.relation_names.len());
    }

    /// Number of sealed snapshots.
    pub fn num_snapshots(&self) -> usize {
        self.entities_by_snapshot.len()
    }

    /// Entities known once snapshot `t` has been absorbed; they occupy ids
    /// `0..entities_at(t)`.
    pub fn entities_at(&self, snapshot: usize) -> usize {
        self.entities_by_snapshot[snapshot]
    }

    /// Relations known once snapshot `t` has been absorbed.
    pub fn relations_at(&self, snapshot: usize) -> usize {
        self.relations_by_snapshot[snapshot]
    }

    /// Checks density and first-seen ordering of the id space.
    pub fn validate(&self) -> Result<(), DataError> {
        for window in self.entity_first_seen.windows(2) {
            if window[1] < window[0] {
                return Err(DataError::NonMonotone {
                    snapshot: window[1],
                });
            }
        }
        for window in self.relation_first_seen.windows(2) {
            if window[1] < window[0] {
                return Err(DataError::NonMonotone {
                    snapshot: window[1],
                });
            }
        }
        Ok(())
    }

    /// Hash of the full name/id mapping, hex encoded. Two corpora with the
    /// same hash agree on every id assignment.
    pub fn content_hash(&self) -> String {
        self.hash_prefix(self.num_entities(), self.num_relations())
    }

    /// Hash of the mapping restricted to symbols known at `snapshot`. Used to
    /// bind checkpoints to the vocabulary state they were trained against.
    pub fn content_hash_at(&self, snapshot: usize) -> String {
        self.hash_prefix(self.entities_at(snapshot), self.relations_at(snapshot))
    }

    fn hash_prefix(&self, entities: usize, relations: usize) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"entities\n");
        for name in &self.entity_names[..entities] {
            hasher.update(name.as_bytes());
            hasher.update(b"\n");
        }
        hasher.update(b"relations\n");
        for name in &self.relation_names[..relations] {
            hasher.update(name.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_idempotent_and_dense() {
        let mut v = Vocabulary::new();
        let a = v.intern_entity("alpha", 0);
        let b = v.intern_entity("beta", 0);
        assert_eq!((a, b), (0, 1));
        assert_eq!(v.intern_entity("alpha", 1), 0);
        assert_eq!(v.num_entities(), 2);
        assert_eq!(v.entity_first_seen(0), Some(0));
    }

    #[test]
    fn sealed_counts_are_prefixes() {
        let mut v = Vocabulary::new();
        v.intern_entity("a", 0);
        v.intern_relation("r", 0);
        v.seal_snapshot(0);
        v.intern_entity("b", 1);
        v.intern_entity("c", 1);
        v.seal_snapshot(1);
        assert_eq!(v.entities_at(0), 1);
        assert_eq!(v.entities_at(1), 3);
        assert_eq!(v.relations_at(1), 1);
    }

    #[test]
    fn snapshot_hash_ignores_later_symbols() {
        let mut v = Vocabulary::new();
        v.intern_entity("a", 0);
        v.intern_relation("r", 0);
        v.seal_snapshot(0);
        let h0 = v.content_hash_at(0);
        v.intern_entity("b", 1);
        v.seal_snapshot(1);
        assert_eq!(v.content_hash_at(0), h0);
        assert_ne!(v.content_hash_at(1), h0);
    }

    #[test]
    fn out_of_order_first_seen_fails_validation() {
        let mut v = Vocabulary::new();
        v.intern_entity("late", 2);
        v.intern_entity("early", 0);
        assert!(v.validate().is_err());
    }
}
