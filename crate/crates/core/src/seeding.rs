//! Deterministic derivation of per-purpose random streams.
//!
//! Every random decision in a run flows from one base seed. Sub-streams are
//! derived by folding labeled context (snapshot index, epoch, purpose tag)
//! through splitmix64, so adding a consumer never perturbs existing streams
//! and the same configuration replays bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tag distinguishing random streams that share a base seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Initialization of new entity embeddings.
    EntityInit,
    /// Initialization of new relation embeddings.
    RelationInit,
    /// Initialization of cluster proxy vectors.
    ProxyInit,
    /// Shuffling of training triples each epoch.
    Shuffle,
    /// Negative sampling during training.
    Negative,
    /// Pivot selection for sampled betweenness.
    Pivots,
    /// Synthetic corpus generation.
    Synthetic,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::EntityInit => 0x1,
            Stream::RelationInit => 0x2,
            Stream::ProxyInit => 0x3,
            Stream::Shuffle => 0x4,
            Stream::Negative => 0x5,
            Stream::Pivots => 0x6,
            Stream::Synthetic => 0x7,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derives a child seed from a base seed and labeled context values.
pub fn derive_seed(base: u64, stream: Stream, context: &[u64]) -> u64 {
    let mut state = splitmix64(base ^ stream.tag().wrapping_mul(0xa076_1d64_78bd_642f));
    for &value in context {
        state = splitmix64(state ^ value);
    }
    state
}

/// Deterministic generator for one purpose within a run.
pub fn rng_for(base: u64, stream: Stream, context: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, stream, context))
}
