use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::kg::Triple;
use crate::scalar::Real;
use crate::store::ValueTable;
use crate::trainer::transe_score;

/// Candidate filtering during ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Every entity competes, even ones forming other true triples.
    Raw,
    /// Candidates forming a known true triple are excluded, except the gold
    /// answer itself.
    Filtered,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::Raw => write!(f, "raw"),
            Protocol::Filtered => write!(f, "filtered"),
        }
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Protocol::Raw),
            "filtered" => Ok(Protocol::Filtered),
            other => Err(format!(
                "unknown protocol '{other}', expected raw or filtered"
            )),
        }
    }
}

/// Which slot of the triple is being predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuerySide {
    /// Predict the head given `(?, r, t)`.
    Head,
    /// Predict the tail given `(h, r, ?)`.
    Tail,
}

/// Pessimistic competition rank of the gold score among the others: one plus
/// the number of strictly better scores plus the number of exact ties.
/// Lower scores are better. Degenerate models where many candidates tie
/// collapse toward the worst rank instead of looking artificially good.
pub fn rank_from_scores<T: Real>(gold: T, others: impl Iterator<Item = T>) -> usize {
    let mut rank = 1usize;
    for score in others {
        if score < gold || score == gold {
            rank += 1;
        }
    }
    rank
}

/// Ranks the gold entity of `triple` on `side` against all `num_candidates`
/// known entities.
///
/// Under [`Protocol::Filtered`], candidates that would form a triple in
/// `filter` are skipped; the gold answer itself always competes, so a rank
/// of 1 is reachable exactly when the gold scores strictly best.
pub fn rank_query<T: Real>(
    triple: &Triple,
    side: QuerySide,
    entities: &ValueTable<T>,
    relations: &ValueTable<T>,
    num_candidates: u32,
    filter: &HashSet<Triple>,
    protocol: Protocol,
) -> Result<usize, EvalError> {
    let gold_id = match side {
        QuerySide::Head => triple.head,
        QuerySide::Tail => triple.tail,
    };
    if gold_id >= num_candidates {
        return Err(EvalError::GoldMissing { id: gold_id });
    }
    let relation = relations.row(triple.relation);
    let gold_score = transe_score(
        entities.row(triple.head),
        relation,
        entities.row(triple.tail),
    );

    let mut rank = 1usize;
    for candidate in 0..num_candidates {
        if candidate == gold_id {
            continue;
        }
        let candidate_triple = match side {
            QuerySide::Head => triple.with_head(candidate),
            QuerySide::Tail => triple.with_tail(candidate),
        };
        if protocol == Protocol::Filtered && filter.contains(&candidate_triple) {
            continue;
        }
        let score = transe_score(
            entities.row(candidate_triple.head),
            relation,
            entities.row(candidate_triple.tail),
        );
        if score <= gold_score {
            rank += 1;
        }
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Embeddings on a line so scores are easy to read off: entity i sits at
    /// position i, the relation translates by +1. Gold (0, r, 1) is exact.
    fn line_model(n: usize) -> (ValueTable<f64>, ValueTable<f64>) {
        let mut entities = ValueTable::zeros(n, 1);
        for i in 0..n {
            entities.row_mut(i as u32)[0] = i as f64;
        }
        let mut relations = ValueTable::zeros(1, 1);
        relations.row_mut(0)[0] = 1.0;
        (entities, relations)
    }

    #[test]
    fn exact_match_ranks_first() {
        let (entities, relations) = line_model(5);
        let triple = Triple::new(0, 0, 1);
        let rank = rank_query(
            &triple,
            QuerySide::Tail,
            &entities,
            &relations,
            5,
            &HashSet::new(),
            Protocol::Raw,
        )
        .unwrap();
        assert_eq!(rank, 1);
    }

    #[test]
    fn filtering_removes_known_competitors() {
        // Tail query for (1, r, 2): candidate 2 is gold and exact. In the raw
        // setting every other candidate still competes; filtering out the
        // known (1, r, 3) removes one of them but never the gold.
        let (entities, relations) = line_model(5);
        let triple = Triple::new(1, 0, 2);
        let known: HashSet<Triple> = [Triple::new(1, 0, 3)].into_iter().collect();
        let raw = rank_query(
            &triple,
            QuerySide::Tail,
            &entities,
            &relations,
            5,
            &known,
            Protocol::Raw,
        )
        .unwrap();
        let filtered = rank_query(
            &triple,
            QuerySide::Tail,
            &entities,
            &relations,
            5,
            &known,
            Protocol::Filtered,
        )
        .unwrap();
        assert_eq!(raw, 1);
        assert_eq!(filtered, 1);

        // Make the gold imperfect: for (1, r, 3) the best tail is 2 (exact),
        // tail 1 ties the gold at distance 1.
        let triple = Triple::new(1, 0, 3);
        let known: HashSet<Triple> = [Triple::new(1, 0, 2)].into_iter().collect();
        let raw = rank_query(
            &triple,
            QuerySide::Tail,
            &entities,
            &relations,
            5,
            &known,
            Protocol::Raw,
        )
        .unwrap();
        let filtered = rank_query(
            &triple,
            QuerySide::Tail,
            &entities,
            &relations,
            5,
            &known,
            Protocol::Filtered,
        )
        .unwrap();
        assert_eq!(raw, 3, "one strict better, one tie");
        assert_eq!(filtered, 2, "filtering removes the known competitor only");
    }

    #[test]
    fn ties_count_against_the_gold() {
        // All entities identical: every candidate ties, pessimistic rank is
        // the full candidate count.
        let entities: ValueTable<f64> = ValueTable::zeros(4, 2);
        let relations = ValueTable::zeros(1, 2);
        let rank = rank_query(
            &Triple::new(0, 0, 1),
            QuerySide::Tail,
            &entities,
            &relations,
            4,
            &HashSet::new(),
            Protocol::Raw,
        )
        .unwrap();
        assert_eq!(rank, 4);
    }

    #[test]
    fn head_queries_corrupt_the_head_slot() {
        let (entities, relations) = line_model(5);
        // (3, r, 4) is exact; head query asks which entity maps to 4.
        let rank = rank_query(
            &Triple::new(3, 0, 4),
            QuerySide::Head,
            &entities,
            &relations,
            5,
            &HashSet::new(),
            Protocol::Raw,
        )
        .unwrap();
        assert_eq!(rank, 1);
    }

    #[test]
    fn gold_outside_the_candidate_set_is_an_error() {
        let (entities, relations) = line_model(5);
        let err = rank_query(
            &Triple::new(0, 0, 4),
            QuerySide::Tail,
            &entities,
            &relations,
            3,
            &HashSet::new(),
            Protocol::Raw,
        )
        .unwrap_err();
        assert!(matches!(err, EvalError::GoldMissing { id: 4 }));
    }

    #[test]
    fn rank_is_invariant_under_monotone_score_transforms() {
        let gold = 0.4f64;
        let others = [0.1, 0.4, 0.9, 2.0, 0.39];
        let direct = rank_from_scores(gold, others.iter().copied());
        let squashed = rank_from_scores(gold.tanh(), others.iter().map(|s| s.tanh()));
        assert_eq!(direct, squashed);
        assert_eq!(direct, 4);
    }
}
