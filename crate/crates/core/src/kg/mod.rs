//! Snapshot corpora: triples, vocabularies, loading, writing and generation.
//!
//! A corpus is a sequence of growing graph snapshots. Each snapshot directory
//! holds the triples that are new at that step, split into train, valid and
//! test files; entities and relations accumulate across snapshots and never
//! disappear. Ids are dense and assigned in first-seen order, which later
//! stages rely on: the set of entities known at snapshot `t` is always the
//! prefix `0..N_t` of the id space.

mod loader;
mod negative;
mod sequence;
mod synthetic;
mod triple;
mod vocab;
mod writer;

pub use loader::{load_snapshot_sequence, load_snapshot_sequence_with, LoaderOptions};
pub use negative::{sample_negative, NEGATIVE_RETRY_LIMIT};
pub use sequence::{Snapshot, SnapshotSequence, SnapshotStats};
pub use synthetic::{generate_synthetic_sequence, GrowthRegime, SyntheticSpec};
pub use triple::Triple;
pub use vocab::Vocabulary;
pub use writer::write_snapshot_sequence;
