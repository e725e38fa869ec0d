use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::kg::Triple;
use crate::scalar::Real;
use crate::store::ValueTable;

use super::rank::{rank_query, Protocol, QuerySide};

/// Aggregate ranking quality. Metrics are reported in `f64` regardless of
/// the training scalar so numbers stay comparable across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    /// Mean reciprocal rank in `(0, 1]`.
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
}

impl LinkMetrics {
    /// Aggregates a list of ranks; at least one rank is required.
    pub fn from_ranks(ranks: &[usize]) -> Result<Self, EvalError> {
        if ranks.is_empty() {
            return Err(EvalError::EmptyTestSet);
        }
        let n = ranks.len() as f64;
        let mut reciprocal = 0.0f64;
        let mut hits = [0usize; 3];
        for &rank in ranks {
            reciprocal += 1.0 / rank as f64;
            for (slot, threshold) in hits.iter_mut().zip([1usize, 3, 10]) {
                if rank <= threshold {
                    *slot += 1;
                }
            }
        }
        Ok(LinkMetrics {
            mrr: reciprocal / n,
            hits1: hits[0] as f64 / n,
            hits3: hits[1] as f64 / n,
            hits10: hits[2] as f64 / n,
        })
    }

    /// Unweighted mean of several metric sets.
    pub fn mean(parts: &[LinkMetrics]) -> Result<LinkMetrics, EvalError> {
        if parts.is_empty() {
            return Err(EvalError::EmptyTestSet);
        }
        let n = parts.len() as f64;
        Ok(LinkMetrics {
            mrr: parts.iter().map(|m| m.mrr).sum::<f64>() / n,
            hits1: parts.iter().map(|m| m.hits1).sum::<f64>() / n,
            hits3: parts.iter().map(|m| m.hits3).sum::<f64>() / n,
            hits10: parts.iter().map(|m| m.hits10).sum::<f64>() / n,
        })
    }

    pub fn named_values(&self) -> [(&'static str, f64); 4] {
        [
            ("mrr", self.mrr),
            ("hits1", self.hits1),
            ("hits3", self.hits3),
            ("hits10", self.hits10),
        ]
    }
}

/// Ranks every test triple from both sides and aggregates.
///
/// Each triple contributes a head query and a tail query, in test-set
/// order; the aggregation order is fixed so results reproduce exactly.
pub fn link_prediction_metrics<T: Real>(
    test: &[Triple],
    entities: &ValueTable<T>,
    relations: &ValueTable<T>,
    num_candidates: u32,
    filter: &HashSet<Triple>,
    protocol: Protocol,
) -> Result<LinkMetrics, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let mut ranks = Vec::with_capacity(test.len() * 2);
    for triple in test {
        for side in [QuerySide::Head, QuerySide::Tail] {
            ranks.push(rank_query(
                triple,
                side,
                entities,
                relations,
                num_candidates,
                filter,
                protocol,
            )?);
        }
    }
    LinkMetrics::from_ranks(&ranks)
}
