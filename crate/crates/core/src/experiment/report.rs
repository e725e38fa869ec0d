//! Rendering finished runs into comparison tables and plotting CSV.

use crate::eval::RunReport;

/// A named run report, as rendered by the comparison view.
pub type NamedReport = (String, RunReport);

/// Marks the best value per column with a `*`.
///
/// Runs with the same snapshot structure share one table per model snapshot;
/// structurally different runs fall back to one section per run.
pub fn render_comparison(runs: &[NamedReport]) -> String {
    if runs.is_empty() {
        return String::from("no runs\n");
    }
    let comparable = runs
        .windows(2)
        .all(|pair| pair[0].1.reports.len() == pair[1].1.reports.len());
    if !comparable {
        let mut out = String::new();
        for (name, report) in runs {
            out.push_str(&format!("== {name} ==\n"));
            out.push_str(&render_single(report));
            out.push('\n');
        }
        return out;
    }

    let snapshots = runs[0].1.reports.len();
    let name_width = runs
        .iter()
        .map(|(name, _)| name.len())
        .chain(std::iter::once("run".len()))
        .max()
        .unwrap();
    let mut out = String::new();
    for t in 0..snapshots {
        out.push_str(&format!(
            "model snapshot {t}, averaged over its test sets\n"
        ));
        out.push_str(&format!(
            "{:name_width$}  {:>8}  {:>8}  {:>8}  {:>8}\n",
            "run", "MRR", "Hits@1", "Hits@3", "Hits@10"
        ));
        let columns: Vec<Vec<f64>> = runs
            .iter()
            .map(|(_, report)| {
                report.reports[t]
                    .average
                    .named_values()
                    .iter()
                    .map(|(_, value)| *value)
                    .collect()
            })
            .collect();
        let best: Vec<f64> = (0..4)
            .map(|m| {
                columns
                    .iter()
                    .map(|row| row[m])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        for ((name, _), row) in runs.iter().zip(&columns) {
            out.push_str(&format!("{name:name_width$}"));
            for (m, value) in row.iter().enumerate() {
                let mark = if runs.len() > 1 && *value == best[m] {
                    "*"
                } else {
                    " "
                };
                out.push_str(&format!("  {value:>7.4}{mark}"));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Per-test-set table of one run.
pub fn render_single(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>14}  {:>13}  {:>8}  {:>8}  {:>8}  {:>8}\n",
        "model_snapshot", "test_snapshot", "MRR", "Hits@1", "Hits@3", "Hits@10"
    ));
    for model_report in &report.reports {
        for snap in &model_report.per_test {
            let m = snap.metrics;
            out.push_str(&format!(
                "{:>14}  {:>13}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}\n",
                model_report.model_snapshot,
                snap.test_snapshot,
                m.mrr,
                m.hits1,
                m.hits3,
                m.hits10
            ));
        }
        let avg = model_report.average;
        out.push_str(&format!(
            "{:>14}  {:>13}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}\n",
            model_report.model_snapshot, "average", avg.mrr, avg.hits1, avg.hits3, avg.hits10
        ));
    }
    out
}

/// Long-format CSV across runs: one row per run, model snapshot, test
/// snapshot and metric. Ready for external plotting of forgetting curves.
pub fn long_csv(runs: &[NamedReport]) -> String {
    let mut out = String::from("run,model_snapshot,test_snapshot,metric,value\n");
    for (name, report) in runs {
        for model_report in &report.reports {
            for (model, test, metric, value) in model_report.csv_rows() {
                out.push_str(&format!("{name},{model},{test},{metric},{value}\n"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{LinkMetrics, MetricsReport, Protocol, SnapshotMetrics};

    fn metrics(mrr: f64) -> LinkMetrics {
        LinkMetrics {
            mrr,
            hits1: mrr / 2.0,
            hits3: mrr / 1.5,
            hits10: mrr,
        }
    }

    fn report(snapshots: usize, base: f64) -> RunReport {
        let mut run = RunReport::default();
        for t in 0..snapshots {
            let per_test: Vec<SnapshotMetrics> = (0..=t)
                .map(|j| SnapshotMetrics {
                    test_snapshot: j,
                    metrics: metrics(base + 0.01 * j as f64),
                })
                .collect();
            let average = metrics(base + 0.005 * t as f64);
            run.reports.push(MetricsReport {
                model_snapshot: t,
                protocol: Protocol::Filtered,
                per_test,
                average,
            });
        }
        run
    }

    #[test]
    fn the_best_run_per_column_is_starred() {
        let runs = vec![
            ("full".to_string(), report(2, 0.30)),
            ("ablated".to_string(), report(2, 0.20)),
        ];
        let table = render_comparison(&runs);
        let full_line = table
            .lines()
            .find(|line| line.starts_with("full"))
            .unwrap();
        assert_eq!(full_line.matches('*').count(), 4);
        let ablated_line = table
            .lines()
            .find(|line| line.starts_with("ablated"))
            .unwrap();
        assert_eq!(ablated_line.matches('*').count(), 0);
    }

    #[test]
    fn a_single_run_is_rendered_without_stars() {
        let runs = vec![("only".to_string(), report(2, 0.30))];
        let table = render_comparison(&runs);
        assert!(!table.contains('*'));
    }

    #[test]
    fn mismatched_runs_fall_back_to_sections() {
        let runs = vec![
            ("short".to_string(), report(1, 0.30)),
            ("long".to_string(), report(3, 0.20)),
        ];
        let table = render_comparison(&runs);
        assert!(table.contains("== short =="));
        assert!(table.contains("== long =="));
    }

    #[test]
    fn csv_row_count_is_runs_by_snapshots_by_tests_by_metrics() {
        let runs = vec![
            ("a".to_string(), report(3, 0.30)),
            ("b".to_string(), report(3, 0.20)),
        ];
        let csv = long_csv(&runs);
        // Each run: model snapshots 0..3 with 1+2+3 test sets, 4 metrics.
        let expected = 2 * (1 + 2 + 3) * 4;
        assert_eq!(csv.lines().count(), expected + 1);
        assert!(csv.starts_with("run,model_snapshot,test_snapshot,metric,value"));
    }
}
