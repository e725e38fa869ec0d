use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::kg::{Snapshot, SnapshotSequence, Triple, Vocabulary};
use crate::seeding::{rng_for, Stream};

/// How entity and triple growth is distributed across snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthRegime {
    /// Every snapshot adds about the same amount.
    Equal,
    /// Later snapshots add more; per-step weights double.
    Higher,
    /// Later snapshots add less; per-step weights halve.
    Lower,
}

impl GrowthRegime {
    fn weights(self, snapshots: usize) -> Vec<u64> {
        (0..snapshots)
            .map(|i| match self {
                GrowthRegime::Equal => 1u64,
                GrowthRegime::Higher => 1u64 << i.min(62),
                GrowthRegime::Lower => 1u64 << (snapshots - 1 - i).min(62),
            })
            .collect()
    }
}

impl fmt::Display for GrowthRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthRegime::Equal => write!(f, "equal"),
            GrowthRegime::Higher => write!(f, "higher"),
            GrowthRegime::Lower => write!(f, "lower"),
        }
    }
}

impl FromStr for GrowthRegime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "equal" => Ok(GrowthRegime::Equal),
            "higher" => Ok(GrowthRegime::Higher),
            "lower" => Ok(GrowthRegime::Lower),
            other => Err(format!(
                "unknown growth regime '{other}', expected equal, higher or lower"
            )),
        }
    }
}

/// Parameters of a generated corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub regime: GrowthRegime,
    pub snapshots: usize,
    /// Total entities once all snapshots are present.
    pub entities: usize,
    /// Total triples across all snapshots and splits.
    pub triples: usize,
    /// Relations; all are introduced in snapshot 0.
    pub relations: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Cumulative entity counts and per-snapshot triple counts implied by the
    /// regime, or the reason the spec cannot be realized.
    fn schedule(&self) -> Result<(Vec<usize>, Vec<usize>), DataError> {
        if self.snapshots == 0 {
            return Err(DataError::InfeasibleSpec("need at least one snapshot".into()));
        }
        if self.relations == 0 {
            return Err(DataError::InfeasibleSpec("need at least one relation".into()));
        }
        if self.entities < 2 {
            return Err(DataError::InfeasibleSpec("need at least two entities".into()));
        }

        let weights = self.regime.weights(self.snapshots);
        let entity_deltas = apportion(self.entities, &weights);
        let triple_deltas = apportion(self.triples, &weights);

        if entity_deltas[0] < 2 {
            return Err(DataError::InfeasibleSpec(
                "growth schedule leaves snapshot 0 with fewer than two entities; \
                 raise the entity count"
                    .into(),
            ));
        }
        let mut cumulative_entities = Vec::with_capacity(self.snapshots);
        let mut total = 0usize;
        for delta in &entity_deltas {
            total += delta;
            cumulative_entities.push(total);
        }

        let needed_0 = entity_deltas[0].max(self.relations);
        if triple_deltas[0] < needed_0 {
            return Err(DataError::InfeasibleSpec(format!(
                "snapshot 0 holds {} triples but must seed {} entities and {} relations",
                triple_deltas[0], entity_deltas[0], self.relations
            )));
        }
        let mut cumulative_triples = 0u128;
        for t in 0..self.snapshots {
            if t > 0 && triple_deltas[t] < entity_deltas[t] {
                return Err(DataError::InfeasibleSpec(format!(
                    "snapshot {t} holds {} triples but must seed {} new entities",
                    triple_deltas[t], entity_deltas[t]
                )));
            }
            cumulative_triples += triple_deltas[t] as u128;
            let capacity =
                (cumulative_entities[t] as u128).pow(2) * self.relations as u128;
            if cumulative_triples > capacity {
                return Err(DataError::InfeasibleSpec(format!(
                    "snapshot {t} needs {cumulative_triples} distinct triples but only \
                     {capacity} exist over {} entities and {} relations",
                    cumulative_entities[t], self.relations
                )));
            }
        }
        Ok((cumulative_entities, triple_deltas))
    }

    pub fn validate(&self) -> Result<(), DataError> {
        self.schedule().map(|_| ())
    }
}

/// Splits `total` into parts proportional to `weights` using largest
/// remainders, ties to the lower index. Deterministic and exact.
fn apportion(total: usize, weights: &[u64]) -> Vec<usize> {
    let sum: u128 = weights.iter().map(|&w| w as u128).sum();
    let mut parts: Vec<usize> = Vec::with_capacity(weights.len());
    let mut remainders: Vec<(u128, usize)> = Vec::with_capacity(weights.len());
    let mut assigned = 0usize;
    for (i, &w) in weights.iter().enumerate() {
        let exact = total as u128 * w as u128;
        parts.push((exact / sum) as usize);
        remainders.push((exact % sum, i));
        assigned += *parts.last().unwrap();
    }
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(total - assigned) {
        parts[i] += 1;
    }
    parts
}

/// Dimension of the hidden geometry the corpus is drawn from.
const LATENT_DIM: usize = 8;
/// Noise scale of tail selection; smaller values make the corpus easier to
/// learn, larger ones blur it toward uniform noise.
const LATENT_NOISE: f64 = 1.0;

/// Hidden translational geometry behind a generated corpus.
///
/// Every entity gets a latent position and every relation a latent offset;
/// a triple (h, r, t) is the more plausible the smaller
/// `|pos(h) + off(r) - pos(t)|` is. Train, valid and test triples are drawn
/// from the same geometry, so an embedding model can genuinely learn the
/// corpus instead of memorizing unrelatable noise.
struct LatentModel {
    positions: Vec<Vec<f64>>,
    offsets: Vec<Vec<f64>>,
}

impl LatentModel {
    fn draw(entities: usize, relations: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut gaussian_rows = |count: usize| -> Vec<Vec<f64>> {
            (0..count)
                .map(|_| {
                    (0..LATENT_DIM)
                        .map(|_| StandardNormal.sample(rng))
                        .collect()
                })
                .collect()
        };
        LatentModel {
            positions: gaussian_rows(entities),
            offsets: gaussian_rows(relations),
        }
    }

    /// Samples a tail among `0..num_entities` with probability proportional
    /// to `exp(-|pos(head) + off(relation) - pos(tail)|^2 / (2 noise^2))`.
    fn sample_tail(
        &self,
        head: u32,
        relation: u32,
        num_entities: u32,
        rng: &mut ChaCha8Rng,
    ) -> u32 {
        let target: Vec<f64> = self.positions[head as usize]
            .iter()
            .zip(&self.offsets[relation as usize])
            .map(|(&p, &o)| p + o)
            .collect();
        let scale = -0.5 / (LATENT_NOISE * LATENT_NOISE);
        let weights: Vec<f64> = (0..num_entities as usize)
            .map(|tail| {
                let d2: f64 = self.positions[tail]
                    .iter()
                    .zip(&target)
                    .map(|(&z, &t)| (z - t) * (z - t))
                    .sum();
                (scale * d2).exp()
            })
            .collect();
        let total: f64 = weights.iter().sum();
        // One uniform draw regardless of outcome keeps the stream stable.
        let mut threshold = rng.gen::<f64>() * total;
        if total <= 0.0 {
            return rng.gen_range(0..num_entities);
        }
        for (tail, &weight) in weights.iter().enumerate() {
            threshold -= weight;
            if threshold <= 0.0 {
                return tail as u32;
            }
        }
        num_entities - 1
    }
}

/// Generates a random growing corpus matching `spec`.
///
/// Triples are drawn from a hidden translational geometry (see
/// [`LatentModel`]), so the corpus rewards actual learning. Every entity
/// appears in at least one triple of the snapshot that introduces it, so
/// loading a written copy reproduces the same first-seen assignment. All
/// randomness comes from the spec seed; equal specs generate byte-identical
/// corpora.
pub fn generate_synthetic_sequence(spec: &SyntheticSpec) -> Result<SnapshotSequence, DataError> {
    let (cumulative_entities, triple_deltas) = spec.schedule()?;
    let mut rng = rng_for(spec.seed, Stream::Synthetic, &[]);
    let latent = LatentModel::draw(spec.entities, spec.relations, &mut rng);
    let mut vocab = Vocabulary::new();
    let mut used: HashSet<Triple> = HashSet::new();
    let mut snapshots = Vec::with_capacity(spec.snapshots);
    // Relations are cycled through deterministically until each has appeared
    // once; afterwards they are drawn uniformly.
    let mut forced_relation = 0u32;

    for t in 0..spec.snapshots {
        let known_before = if t == 0 { 0 } else { cumulative_entities[t - 1] };
        let known_after = cumulative_entities[t];
        for id in known_before..known_after {
            vocab.intern_entity(&format!("e{id}"), t);
        }

        let mut delta: Vec<Triple> = Vec::with_capacity(triple_deltas[t]);
        for id in known_before..known_after {
            let triple = seed_triple(
                id as u32,
                known_after as u32,
                spec.relations as u32,
                &latent,
                &mut forced_relation,
                &mut used,
                &mut rng,
            )?;
            intern_relation(&mut vocab, triple.relation, t);
            delta.push(triple);
        }
        while delta.len() < triple_deltas[t] {
            let triple = plausible_triple(
                known_after as u32,
                spec.relations as u32,
                &latent,
                &mut forced_relation,
                &mut used,
                &mut rng,
            )?;
            intern_relation(&mut vocab, triple.relation, t);
            delta.push(triple);
        }

        delta.shuffle(&mut rng);
        let tenth = delta.len() / 10;
        let test = delta.split_off(delta.len() - tenth);
        let valid = delta.split_off(delta.len() - tenth);
        vocab.seal_snapshot(t);
        snapshots.push(Snapshot {
            index: t,
            num_entities: vocab.entities_at(t),
            num_relations: vocab.relations_at(t),
            train: delta,
            valid,
            test,
        });
    }

    let sequence = renumber_in_loader_order(SnapshotSequence { vocab, snapshots });
    sequence.validate()?;
    Ok(sequence)
}

/// Reassigns ids in the order the loader would intern them (train, valid,
/// test per snapshot; head before tail within a line), so that writing the
/// sequence and loading it back reproduces ids and vocabulary hashes
/// exactly.
fn renumber_in_loader_order(sequence: SnapshotSequence) -> SnapshotSequence {
    let old = &sequence.vocab;
    let mut vocab = Vocabulary::new();
    let mut snapshots = Vec::with_capacity(sequence.snapshots.len());
    for snapshot in &sequence.snapshots {
        let mut renumber = |triples: &[Triple]| -> Vec<Triple> {
            triples
                .iter()
                .map(|t| {
                    let head =
                        vocab.intern_entity(old.entity_name(t.head).unwrap(), snapshot.index);
                    let tail =
                        vocab.intern_entity(old.entity_name(t.tail).unwrap(), snapshot.index);
                    let relation = vocab
                        .intern_relation(old.relation_name(t.relation).unwrap(), snapshot.index);
                    Triple::new(head, relation, tail)
                })
                .collect()
        };
        let train = renumber(&snapshot.train);
        let valid = renumber(&snapshot.valid);
        let test = renumber(&snapshot.test);
        vocab.seal_snapshot(snapshot.index);
        snapshots.push(Snapshot {
            index: snapshot.index,
            num_entities: vocab.entities_at(snapshot.index),
            num_relations: vocab.relations_at(snapshot.index),
            train,
            valid,
            test,
        });
    }
    SnapshotSequence { vocab, snapshots }
}

fn intern_relation(vocab: &mut Vocabulary, relation: u32, snapshot: usize) {
    vocab.intern_relation(&format!("r{relation}"), snapshot);
}

fn next_relation(
    num_relations: u32,
    forced_relation: &mut u32,
    rng: &mut ChaCha8Rng,
) -> u32 {
    if *forced_relation < num_relations {
        let r = *forced_relation;
        *forced_relation += 1;
        r
    } else {
        rng.gen_range(0..num_relations)
    }
}

/// A fresh triple with `entity` as head, anchoring a newly introduced entity.
fn seed_triple(
    entity: u32,
    num_entities: u32,
    num_relations: u32,
    latent: &LatentModel,
    forced_relation: &mut u32,
    used: &mut HashSet<Triple>,
    rng: &mut ChaCha8Rng,
) -> Result<Triple, DataError> {
    let relation = next_relation(num_relations, forced_relation, rng);
    for _ in 0..100 {
        let tail = latent.sample_tail(entity, relation, num_entities, rng);
        let candidate = Triple::new(entity, relation, tail);
        if used.insert(candidate) {
            return Ok(candidate);
        }
    }
    // Plausible placements keep colliding; scan the row for any free slot.
    for r in 0..num_relations {
        for tail in 0..num_entities {
            let candidate = Triple::new(entity, r, tail);
            if used.insert(candidate) {
                return Ok(candidate);
            }
        }
    }
    Err(DataError::InfeasibleSpec(format!(
        "no free triple left to anchor entity {entity}"
    )))
}

/// A fresh triple drawn from the latent geometry over the known symbols.
fn plausible_triple(
    num_entities: u32,
    num_relations: u32,
    latent: &LatentModel,
    forced_relation: &mut u32,
    used: &mut HashSet<Triple>,
    rng: &mut ChaCha8Rng,
) -> Result<Triple, DataError> {
    let forced = if *forced_relation < num_relations {
        Some(next_relation(num_relations, forced_relation, rng))
    } else {
        None
    };
    let mut last = Triple::default();
    for _ in 0..100 {
        let relation = forced.unwrap_or_else(|| rng.gen_range(0..num_relations));
        let head = rng.gen_range(0..num_entities);
        let tail = latent.sample_tail(head, relation, num_entities, rng);
        last = Triple::new(head, relation, tail);
        if used.insert(last) {
            return Ok(last);
        }
    }
    // Walk the triple space from the last draw until a free slot appears;
    // capacity was validated up front, so one must exist unless a relation
    // was forced and its plane is full.
    let capacity = num_entities as u64 * num_entities as u64 * num_relations as u64;
    let encode = |t: &Triple| {
        (t.head as u64 * num_relations as u64 + t.relation as u64) * num_entities as u64
            + t.tail as u64
    };
    let start = encode(&last);
    for offset in 1..capacity {
        let index = (start + offset) % capacity;
        let tail = (index % num_entities as u64) as u32;
        let rest = index / num_entities as u64;
        let relation = (rest % num_relations as u64) as u32;
        let head = (rest / num_relations as u64) as u32;
        if forced.is_some() && Some(relation) != forced {
            continue;
        }
        let candidate = Triple::new(head, relation, tail);
        if used.insert(candidate) {
            return Ok(candidate);
        }
    }
    Err(DataError::InfeasibleSpec(
        "triple space exhausted during generation".into(),
    ))
}
