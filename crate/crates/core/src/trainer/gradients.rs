use std::collections::BTreeMap;

use crate::kg::Triple;
use crate::scalar::Real;
use crate::store::ValueTable;
use crate::trainer::transe_score;

/// A positive triple paired with its corruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingPair {
    pub positive: Triple,
    pub negative: Triple,
}

/// Gradients keyed by id, ordered so that applying them is deterministic.
#[derive(Debug, Clone)]
pub struct SparseGrad<T> {
    dim: usize,
    pub entities: BTreeMap<u32, Vec<T>>,
    pub relations: BTreeMap<u32, Vec<T>>,
}

impl<T: Real> SparseGrad<T> {
    pub fn new(dim: usize) -> Self {
        SparseGrad {
            dim,
            entities: BTreeMap::new(),
            relations: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entity_slot(&mut self, id: u32) -> &mut [T] {
        self.entities
            .entry(id)
            .or_insert_with(|| vec![T::zero(); self.dim])
    }

    pub fn relation_slot(&mut self, id: u32) -> &mut [T] {
        self.relations
            .entry(id)
            .or_insert_with(|| vec![T::zero(); self.dim])
    }

    /// Adds `scale * values` into the entity slot for `id`.
    pub fn add_entity(&mut self, id: u32, scale: T, values: &[T]) {
        for (slot, &v) in self.entity_slot(id).iter_mut().zip(values) {
            *slot += scale * v;
        }
    }

    /// Adds `scale * values` into the relation slot for `id`.
    pub fn add_relation(&mut self, id: u32, scale: T, values: &[T]) {
        for (slot, &v) in self.relation_slot(id).iter_mut().zip(values) {
            *slot += scale * v;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.entities
            .values()
            .chain(self.relations.values())
            .all(|row| row.iter().all(|v| v.is_finite()))
    }
}

/// Margin ranking loss and gradients over one batch of pairs.
///
/// The loss is the sum of `max(0, margin + s_pos - s_neg)` over the batch.
/// Active pairs push the positive residual down and the negative residual
/// up through the unit residual direction; pairs at or beyond the margin
/// contribute nothing, and a zero-length residual gets the zero subgradient.
/// Ids shared between the positive and negative triple accumulate both
/// contributions.
pub fn kge_batch_gradients<T: Real>(
    batch: &[TrainingPair],
    entities: &ValueTable<T>,
    relations: &ValueTable<T>,
    margin: T,
) -> (T, SparseGrad<T>) {
    let dim = entities.dim();
    let mut loss = T::zero();
    let mut grad = SparseGrad::new(dim);
    let mut residual_pos = vec![T::zero(); dim];
    let mut residual_neg = vec![T::zero(); dim];

    for pair in batch {
        let score_pos = residual(entities, relations, &pair.positive, &mut residual_pos);
        let score_neg = residual(entities, relations, &pair.negative, &mut residual_neg);
        let hinge = margin + score_pos - score_neg;
        if hinge <= T::zero() {
            continue;
        }
        loss += hinge;

        if score_pos > T::zero() {
            let inv = T::one() / score_pos;
            grad.add_entity(pair.positive.head, inv, &residual_pos);
            grad.add_relation(pair.positive.relation, inv, &residual_pos);
            grad.add_entity(pair.positive.tail, -inv, &residual_pos);
        }
        if score_neg > T::zero() {
            let inv = T::one() / score_neg;
            grad.add_entity(pair.negative.head, -inv, &residual_neg);
            grad.add_relation(pair.negative.relation, -inv, &residual_neg);
            grad.add_entity(pair.negative.tail, inv, &residual_neg);
        }
    }
    (loss, grad)
}

fn residual<T: Real>(
    entities: &ValueTable<T>,
    relations: &ValueTable<T>,
    triple: &Triple,
    out: &mut [T],
) -> T {
    let head = entities.row(triple.head);
    let relation = relations.row(triple.relation);
    let tail = entities.row(triple.tail);
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = head[i] + relation[i] - tail[i];
    }
    transe_score(head, relation, tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tables() -> (ValueTable<f64>, ValueTable<f64>) {
        let entities = ValueTable::from_rows(
            2,
            vec![
                0.2, 0.1, // e0
                0.5, -0.3, // e1
                -0.4, 0.6, // e2
            ],
        )
        .unwrap();
        let relations = ValueTable::from_rows(2, vec![0.3, -0.5]).unwrap();
        (entities, relations)
    }

    #[test]
    fn satisfied_pairs_contribute_nothing() {
        let (entities, relations) = tables();
        let pair = TrainingPair {
            positive: Triple::new(0, 0, 1),
            negative: Triple::new(0, 0, 2),
        };
        // A margin of zero with a far-off negative keeps the hinge inactive.
        let (loss, grad) = kge_batch_gradients(&[pair], &entities, &relations, 0.0);
        assert_eq!(loss, 0.0);
        assert!(grad.entities.is_empty() && grad.relations.is_empty());
    }

    #[test]
    fn loss_matches_the_scores_directly() {
        let (entities, relations) = tables();
        let pair = TrainingPair {
            positive: Triple::new(0, 0, 2),
            negative: Triple::new(0, 0, 1),
        };
        let s_pos = transe_score(entities.row(0), relations.row(0), entities.row(2));
        let s_neg = transe_score(entities.row(0), relations.row(0), entities.row(1));
        let (loss, _) = kge_batch_gradients(&[pair], &entities, &relations, 1.0);
        assert_relative_eq!(loss, (1.0 + s_pos - s_neg).max(0.0), max_relative = 1e-12);
    }

    #[test]
    fn shared_ids_accumulate_both_sides() {
        let (entities, relations) = tables();
        // Tail corruption: head and relation appear in both triples.
        let pair = TrainingPair {
            positive: Triple::new(0, 0, 1),
            negative: Triple::new(0, 0, 2),
        };
        let (_, grad) = kge_batch_gradients(&[pair], &entities, &relations, 10.0);
        // Head gradient = u_pos - u_neg; verify against manual residuals.
        let u = |t: &Triple| {
            let mut r = vec![0.0; 2];
            let s = residual(&entities, &relations, t, &mut r);
            r.iter().map(|v| v / s).collect::<Vec<_>>()
        };
        let u_pos = u(&pair.positive);
        let u_neg = u(&pair.negative);
        let head_grad = &grad.entities[&0];
        assert_relative_eq!(head_grad[0], u_pos[0] - u_neg[0], max_relative = 1e-12);
        assert_relative_eq!(head_grad[1], u_pos[1] - u_neg[1], max_relative = 1e-12);
    }

    #[test]
    fn zero_residual_takes_the_zero_subgradient() {
        let entities = ValueTable::from_rows(2, vec![0.5, 0.5, 0.5, 0.5, 0.1, 0.9]).unwrap();
        let relations = ValueTable::from_rows(2, vec![0.0, 0.0]).unwrap();
        let pair = TrainingPair {
            positive: Triple::new(0, 0, 1), // h + r - t = 0
            negative: Triple::new(0, 0, 2),
        };
        let (loss, grad) = kge_batch_gradients(&[pair], &entities, &relations, 10.0);
        assert!(loss > 0.0);
        // Positive side contributes nothing; only the negative side moves.
        let head_grad = &grad.entities[&0];
        let mut neg_residual = vec![0.0; 2];
        let s_neg = residual(&entities, &relations, &pair.negative, &mut neg_residual);
        assert_relative_eq!(head_grad[0], -neg_residual[0] / s_neg, max_relative = 1e-12);
    }

    #[test]
    fn batch_loss_is_the_sum_over_pairs() {
        let (entities, relations) = tables();
        let pair = TrainingPair {
            positive: Triple::new(0, 0, 2),
            negative: Triple::new(0, 0, 1),
        };
        let (single, _) = kge_batch_gradients(&[pair], &entities, &relations, 1.0);
        let (double, _) = kge_batch_gradients(&[pair, pair], &entities, &relations, 1.0);
        assert_relative_eq!(double, 2.0 * single, max_relative = 1e-12);
    }
}
