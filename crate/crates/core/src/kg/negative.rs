use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::kg::Triple;

/// Attempts before a colliding corruption is returned as-is.
pub const NEGATIVE_RETRY_LIMIT: usize = 100;

/// Corrupts one slot of a positive triple into a negative example.
///
/// A fair coin picks head or tail, the replacement is drawn uniformly from
/// the `num_entities` entities currently known, and draws colliding with a
/// known true triple are rejected. After [`NEGATIVE_RETRY_LIMIT`] failed
/// attempts the last draw is returned even if it is a known triple; training
/// degrades gracefully on tiny dense graphs instead of looping forever.
pub fn sample_negative(
    positive: &Triple,
    num_entities: u32,
    known: &HashSet<Triple>,
    rng: &mut ChaCha8Rng,
) -> Triple {
    debug_assert!(num_entities > 0);
    let mut candidate = *positive;
    for _ in 0..NEGATIVE_RETRY_LIMIT {
        let replacement = rng.gen_range(0..num_entities);
        candidate = if rng.gen_bool(0.5) {
            positive.with_head(replacement)
        } else {
            positive.with_tail(replacement)
        };
        if !known.contains(&candidate) {
            return candidate;
        }
    }
    candidate
}
