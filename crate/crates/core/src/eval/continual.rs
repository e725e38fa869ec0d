use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::kg::SnapshotSequence;
use crate::scalar::Real;
use crate::store::ValueTable;

use super::metrics::{link_prediction_metrics, LinkMetrics};
use super::rank::Protocol;

/// Metrics of one model snapshot on one test snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMetrics {
    pub test_snapshot: usize,
    pub metrics: LinkMetrics,
}

/// Full evaluation of a model trained through `model_snapshot`: one metric
/// set per past test snapshot and their unweighted average, the headline
/// number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model_snapshot: usize,
    pub protocol: Protocol,
    pub per_test: Vec<SnapshotMetrics>,
    pub average: LinkMetrics,
}

/// Reports of every model snapshot of a run, in training order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub reports: Vec<MetricsReport>,
}

impl MetricsReport {
    /// Long-format rows `(model_snapshot, test_snapshot, metric, value)`.
    pub fn csv_rows(&self) -> Vec<(usize, usize, &'static str, f64)> {
        self.per_test
            .iter()
            .flat_map(|snap| {
                snap.metrics
                    .named_values()
                    .into_iter()
                    .map(move |(name, value)| (self.model_snapshot, snap.test_snapshot, name, value))
            })
            .collect()
    }
}

/// Evaluates embeddings trained through snapshot `model_snapshot` on the
/// test sets of all snapshots up to and including it.
///
/// Candidates are the entities known at the model snapshot; the filter is
/// every triple of every split up to the model snapshot, so newer true
/// triples never penalize older test sets. The tables are expected to hold
/// the stored posterior means at that snapshot.
pub fn continual_evaluate<T: Real>(
    sequence: &SnapshotSequence,
    model_snapshot: usize,
    entities: &ValueTable<T>,
    relations: &ValueTable<T>,
    protocol: Protocol,
) -> Result<MetricsReport, Error> {
    let snap = &sequence.snapshots[model_snapshot];
    let num_candidates = snap.num_entities as u32;
    let filter = sequence.cumulative_triples(model_snapshot);

    let mut per_test = Vec::with_capacity(model_snapshot + 1);
    for test_snapshot in 0..=model_snapshot {
        let metrics = link_prediction_metrics(
            &sequence.snapshots[test_snapshot].test,
            entities,
            relations,
            num_candidates,
            &filter,
            protocol,
        )?;
        per_test.push(SnapshotMetrics {
            test_snapshot,
            metrics,
        });
    }
    let average = LinkMetrics::mean(
        &per_test
            .iter()
            .map(|snap| snap.metrics)
            .collect::<Vec<_>>(),
    )?;
    Ok(MetricsReport {
        model_snapshot,
        protocol,
        per_test,
        average,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{generate_synthetic_sequence, GrowthRegime, SyntheticSpec};
    use approx::assert_relative_eq;

    fn sequence() -> SnapshotSequence {
        generate_synthetic_sequence(&SyntheticSpec {
            regime: GrowthRegime::Equal,
            snapshots: 3,
            entities: 30,
            triples: 300,
            relations: 3,
            seed: 9,
        })
        .unwrap()
    }

    fn arbitrary_model(sequence: &SnapshotSequence, t: usize) -> (ValueTable<f64>, ValueTable<f64>) {
        let n = sequence.snapshots[t].num_entities;
        let r = sequence.snapshots[t].num_relations;
        let mut entities = ValueTable::zeros(n, 4);
        for i in 0..n as u32 {
            let base = i as f64;
            entities
                .row_mut(i)
                .copy_from_slice(&[base.sin(), base.cos(), (base * 0.3).sin(), 0.1]);
        }
        let mut relations = ValueTable::zeros(r, 4);
        for i in 0..r as u32 {
            relations.row_mut(i).copy_from_slice(&[0.1 * i as f64, 0.2, -0.1, 0.0]);
        }
        (entities, relations)
    }

    #[test]
    fn first_snapshot_average_equals_its_only_test_set() {
        let sequence = sequence();
        let (entities, relations) = arbitrary_model(&sequence, 0);
        let report =
            continual_evaluate(&sequence, 0, &entities, &relations, Protocol::Filtered).unwrap();
        assert_eq!(report.per_test.len(), 1);
        assert_eq!(report.average, report.per_test[0].metrics);
    }

    #[test]
    fn later_snapshots_cover_every_earlier_test_set() {
        let sequence = sequence();
        let (entities, relations) = arbitrary_model(&sequence, 2);
        let report =
            continual_evaluate(&sequence, 2, &entities, &relations, Protocol::Filtered).unwrap();
        assert_eq!(report.per_test.len(), 3);
        let expected: Vec<usize> = (0..3).collect();
        let got: Vec<usize> = report.per_test.iter().map(|s| s.test_snapshot).collect();
        assert_eq!(got, expected);

        let mean = LinkMetrics::mean(
            &report
                .per_test
                .iter()
                .map(|s| s.metrics)
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert_relative_eq!(report.average.mrr, mean.mrr);
    }

    #[test]
    fn csv_rows_enumerate_every_metric_cell() {
        let sequence = sequence();
        let (entities, relations) = arbitrary_model(&sequence, 2);
        let report =
            continual_evaluate(&sequence, 2, &entities, &relations, Protocol::Raw).unwrap();
        let rows = report.csv_rows();
        assert_eq!(rows.len(), 3 * 4);
        assert!(rows.iter().all(|&(model, ..)| model == 2));
    }

    #[test]
    fn raw_and_filtered_protocols_are_both_available() {
        let sequence = sequence();
        let (entities, relations) = arbitrary_model(&sequence, 1);
        let raw =
            continual_evaluate(&sequence, 1, &entities, &relations, Protocol::Raw).unwrap();
        let filtered =
            continual_evaluate(&sequence, 1, &entities, &relations, Protocol::Filtered).unwrap();
        // Filtering can only remove competitors, so MRR never drops.
        for (r, f) in raw.per_test.iter().zip(&filtered.per_test) {
            assert!(f.metrics.mrr >= r.metrics.mrr - 1e-12);
        }
    }
}
