//! The training pipeline: a config in, a run directory of artifacts out.
//!
//! One run walks the snapshots in order. Per snapshot it initializes the
//! embeddings of newly appeared symbols, refreshes the cluster state, trains,
//! folds the result into the posterior store, evaluates on every past test
//! set, and persists a checkpoint. All artifacts except the training log
//! (which records wall-clock times) are bit-identical across reruns of the
//! same config.

use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use log::info;

use crate::checkpoint::{read_checkpoint, write_checkpoint, CheckpointMeta};
use crate::cluster::{AdjacencyGraph, ClusterState};
use crate::error::{CheckpointError, DataError, Error};
use crate::eval::{continual_evaluate, LinkMetrics, MetricsReport, Protocol, RunReport, SnapshotMetrics};
use crate::kg::{generate_synthetic_sequence, load_snapshot_sequence, SnapshotSequence};
use crate::scalar::Real;
use crate::seeding::{rng_for, Stream};
use crate::store::{BayesianStore, TrainedValues};
use crate::trainer::train_snapshot;

use super::config::RunConfig;
use super::manifest::{verify_against_manifest_if_present, Manifest};

pub const CONFIG_FILE: &str = "config.txt";
pub const TRAIN_LOG_FILE: &str = "train_log.jsonl";
pub const METRICS_JSON_FILE: &str = "metrics.json";
pub const METRICS_CSV_FILE: &str = "metrics.csv";
pub const MEAN_METRICS_JSON_FILE: &str = "metrics_mean.json";
pub const MEAN_METRICS_CSV_FILE: &str = "metrics_mean.csv";

pub fn checkpoint_file(snapshot: usize) -> String {
    format!("checkpoint_{snapshot}.ckpt")
}

pub fn clusters_file(snapshot: usize) -> String {
    format!("clusters_{snapshot}.tsv")
}

/// A finished run: where it lives and what it measured.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub report: RunReport,
}

/// A finished seed sweep: the per-seed runs and their averaged report.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub base_dir: PathBuf,
    pub runs: Vec<RunOutcome>,
    pub mean: RunReport,
}

/// Loads the configured data source and validates it.
pub fn load_data(config: &RunConfig) -> Result<SnapshotSequence, Error> {
    let sequence = match &config.data_dir {
        Some(dir) => load_snapshot_sequence(dir)?,
        None => generate_synthetic_sequence(&config.synthetic)?,
    };
    sequence.validate()?;
    Ok(sequence)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|source| {
        Error::Checkpoint(CheckpointError::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn metrics_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from("model_snapshot,test_snapshot,metric,value\n");
    for report in reports {
        for (model, test, metric, value) in report.csv_rows() {
            out.push_str(&format!("{model},{test},{metric},{value}\n"));
        }
    }
    out
}

fn report_json(report: &RunReport) -> Result<String, Error> {
    serde_json::to_string_pretty(report)
        .map(|json| json + "\n")
        .map_err(|err| Error::Config(format!("report serialization: {err}")))
}

/// Trains every snapshot of the configured sequence and fills a directory
/// with config, checkpoints, cluster dumps, metrics, log and manifest.
pub fn run_training<T: Real>(config: &RunConfig) -> Result<RunOutcome, Error> {
    config.validate()?;
    let sequence = load_data(config)?;
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|source| {
        Error::Checkpoint(CheckpointError::Io {
            path: dir.clone(),
            source,
        })
    })?;
    write_file(&dir.join(CONFIG_FILE), &config.resolved_text())?;
    let log_path = dir.join(TRAIN_LOG_FILE);
    let mut train_log = BufWriter::new(fs::File::create(&log_path).map_err(|source| {
        Error::Checkpoint(CheckpointError::Io {
            path: log_path.clone(),
            source,
        })
    })?);

    let hp = &config.hp;
    let mut store: BayesianStore<T> = BayesianStore::new(hp.dim);
    let mut clusters: Option<ClusterState<T>> = None;
    let mut report = RunReport::default();
    let mut artifacts: Vec<String> = vec![CONFIG_FILE.to_string(), TRAIN_LOG_FILE.to_string()];
    let mut completed = 0;

    for t in 0..sequence.len() {
        let step = train_one_snapshot(
            &sequence,
            t,
            config,
            &mut store,
            &mut clusters,
            &mut train_log,
            &dir,
            &mut artifacts,
        );
        match step {
            Ok(snapshot_report) => {
                info!(
                    "snapshot {t}: averaged MRR {:.4} over {} test sets",
                    snapshot_report.average.mrr,
                    snapshot_report.per_test.len()
                );
                report.reports.push(snapshot_report);
                completed = t + 1;
            }
            Err(err) => {
                let _ = train_log.flush();
                Manifest::collect(
                    &dir,
                    hp.seed,
                    completed,
                    Some(format!("snapshot {t}: {err}")),
                    &artifacts,
                )?
                .write(&dir)?;
                return Err(err);
            }
        }
    }
    train_log.flush().map_err(|source| {
        Error::Checkpoint(CheckpointError::Io {
            path: log_path,
            source,
        })
    })?;

    write_file(&dir.join(METRICS_JSON_FILE), &report_json(&report)?)?;
    write_file(&dir.join(METRICS_CSV_FILE), &metrics_csv(&report.reports))?;
    artifacts.push(METRICS_JSON_FILE.to_string());
    artifacts.push(METRICS_CSV_FILE.to_string());
    Manifest::collect(&dir, hp.seed, completed, None, &artifacts)?.write(&dir)?;
    Ok(RunOutcome {
        run_dir: dir,
        report,
    })
}

#[allow(clippy::too_many_arguments)]
fn train_one_snapshot<T: Real>(
    sequence: &SnapshotSequence,
    t: usize,
    config: &RunConfig,
    store: &mut BayesianStore<T>,
    clusters: &mut Option<ClusterState<T>>,
    train_log: &mut impl std::io::Write,
    dir: &Path,
    artifacts: &mut Vec<String>,
) -> Result<MetricsReport, Error> {
    let hp = &config.hp;
    let snap = &sequence.snapshots[t];

    let lambda_init = T::from_f64_lossy(hp.lambda_init);
    let mut rng = rng_for(hp.seed, Stream::EntityInit, &[t as u64]);
    store
        .entities
        .init_new_ids(sequence.new_entities(t), lambda_init, &mut rng)?;
    let mut rng = rng_for(hp.seed, Stream::RelationInit, &[t as u64]);
    store
        .relations
        .init_new_ids(sequence.new_relations(t), lambda_init, &mut rng)?;

    if !config.options.disable_fcc {
        let cumulative = sequence.cumulative_train(t);
        let graph = AdjacencyGraph::from_triples(&cumulative, snap.num_entities);
        let means = store.entities.means_value_table();
        *clusters = Some(ClusterState::build_for_snapshot(
            clusters.as_ref(),
            &graph,
            &means,
            hp,
            t,
        )?);
    }

    let trained = train_snapshot(sequence, t, store, clusters.as_mut(), hp, &config.options)?;
    for epoch in &trained.epochs {
        let line = serde_json::to_string(epoch)
            .map_err(|err| Error::Config(format!("log serialization: {err}")))?;
        writeln!(train_log, "{line}").map_err(|source| {
            Error::Checkpoint(CheckpointError::Io {
                path: dir.join(TRAIN_LOG_FILE),
                source,
            })
        })?;
    }

    let values = TrainedValues {
        entity_values: &trained.entity_values,
        relation_values: &trained.relation_values,
        active_entities: &trained.active_entities,
        active_relations: &trained.active_relations,
    };
    if config.options.disable_bayes {
        store.overwrite_means(&values)?;
    } else {
        store.commit_snapshot(&values, T::from_f64_lossy(hp.lambda_obs))?;
    }

    let meta = CheckpointMeta {
        snapshot_index: t,
        dim: hp.dim,
        num_entities: snap.num_entities,
        num_relations: snap.num_relations,
        vocab_hash: sequence.vocab.content_hash_at(t),
        hyperparameters: hp.clone(),
        options: config.options,
    };
    let ckpt_name = checkpoint_file(t);
    write_checkpoint(&dir.join(&ckpt_name), &meta, store)?;
    artifacts.push(ckpt_name);

    if let Some(state) = clusters.as_ref() {
        let name = clusters_file(t);
        write_file(&dir.join(&name), &cluster_dump(state))?;
        artifacts.push(name);
    }

    let entity_means = store.entities.means_value_table();
    let relation_means = store.relations.means_value_table();
    continual_evaluate(sequence, t, &entity_means, &relation_means, config.protocol)
}

/// Tab-separated membership dump: entity id, cluster, importance score.
fn cluster_dump<T: Real>(state: &ClusterState<T>) -> String {
    let mut out = String::from("entity\tcluster\timportance\n");
    let importance = state.importance();
    for (entity, &cluster) in state.assignment().iter().enumerate() {
        out.push_str(&format!("{entity}\t{cluster}\t{}\n", importance[entity]));
    }
    out
}

/// Re-evaluates a stored checkpoint against a dataset, without training.
///
/// If the checkpoint sits in a run directory with a manifest, its hash is
/// verified first. The dataset must reproduce the vocabulary the checkpoint
/// was built on, compared by content hash over the snapshot prefix.
pub fn evaluate_checkpoint(
    checkpoint_path: &Path,
    sequence: &SnapshotSequence,
    protocol: Protocol,
) -> Result<MetricsReport, Error> {
    if let (Some(dir), Some(name)) = (checkpoint_path.parent(), checkpoint_path.file_name()) {
        verify_against_manifest_if_present(dir, &name.to_string_lossy())?;
    }
    let checkpoint = read_checkpoint(checkpoint_path)?;
    let t = checkpoint.meta.snapshot_index;
    if t >= sequence.len() {
        return Err(Error::Data(DataError::SnapshotOutOfRange {
            index: t,
            len: sequence.len(),
        }));
    }
    let got = sequence.vocab.content_hash_at(t);
    if got != checkpoint.meta.vocab_hash {
        return Err(Error::Checkpoint(CheckpointError::VocabMismatch {
            expected: checkpoint.meta.vocab_hash,
            got,
        }));
    }
    let entity_means = checkpoint.entities.means_value_table();
    let relation_means = checkpoint.relations.means_value_table();
    continual_evaluate(sequence, t, &entity_means, &relation_means, protocol)
}

/// Averages equally shaped run reports metric by metric.
pub fn average_reports(reports: &[RunReport]) -> Result<RunReport, Error> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Config("no reports to average".into()))?;
    let shape_err = || Error::Config("reports have different shapes; cannot average".into());
    for other in &reports[1..] {
        if other.reports.len() != first.reports.len() {
            return Err(shape_err());
        }
    }
    let mut averaged = RunReport::default();
    for (i, model_report) in first.reports.iter().enumerate() {
        let mut per_test = Vec::with_capacity(model_report.per_test.len());
        for (j, snap) in model_report.per_test.iter().enumerate() {
            let parts: Vec<LinkMetrics> = reports
                .iter()
                .map(|r| {
                    let other = &r.reports[i];
                    if other.per_test.len() != model_report.per_test.len()
                        || other.per_test[j].test_snapshot != snap.test_snapshot
                    {
                        return Err(shape_err());
                    }
                    Ok(other.per_test[j].metrics)
                })
                .collect::<Result<_, _>>()?;
            per_test.push(SnapshotMetrics {
                test_snapshot: snap.test_snapshot,
                metrics: LinkMetrics::mean(&parts).map_err(Error::Eval)?,
            });
        }
        let averages: Vec<LinkMetrics> =
            reports.iter().map(|r| r.reports[i].average).collect();
        averaged.reports.push(MetricsReport {
            model_snapshot: model_report.model_snapshot,
            protocol: model_report.protocol,
            per_test,
            average: LinkMetrics::mean(&averages).map_err(Error::Eval)?,
        });
    }
    Ok(averaged)
}

/// Runs the same config under consecutive seeds and averages the reports.
///
/// Each seed trains into `output_dir/seed_<s>`; the averaged metrics land in
/// `output_dir` itself. The data source is shared, so a sweep varies only
/// the training randomness.
pub fn run_seed_sweep<T: Real>(config: &RunConfig, seeds: u64) -> Result<SweepOutcome, Error> {
    if seeds == 0 {
        return Err(Error::Config("need at least one seed".into()));
    }
    let base = config.output_dir.clone();
    let mut runs = Vec::with_capacity(seeds as usize);
    for offset in 0..seeds {
        let mut sub = config.clone();
        sub.hp.seed = config.hp.seed + offset;
        sub.output_dir = base.join(format!("seed_{}", sub.hp.seed));
        runs.push(run_training::<T>(&sub)?);
    }
    let reports: Vec<RunReport> = runs.iter().map(|run| run.report.clone()).collect();
    let mean = average_reports(&reports)?;
    write_file(&base.join(MEAN_METRICS_JSON_FILE), &report_json(&mean)?)?;
    write_file(&base.join(MEAN_METRICS_CSV_FILE), &metrics_csv(&mean.reports))?;
    Ok(SweepOutcome {
        base_dir: base,
        runs,
        mean,
    })
}

/// Reads the metrics report a finished run wrote.
pub fn load_run_report(dir: &Path) -> Result<RunReport, Error> {
    let path = dir.join(METRICS_JSON_FILE);
    let text = fs::read_to_string(&path).map_err(|source| {
        Error::Checkpoint(CheckpointError::Io {
            path: path.clone(),
            source,
        })
    })?;
    serde_json::from_str(&text).map_err(|err| {
        Error::Checkpoint(CheckpointError::Corrupt(format!(
            "{}: {err}",
            path.display()
        )))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::write_snapshot_sequence;

    fn tiny_config(dir: &Path) -> RunConfig {
        let mut config = RunConfig::default();
        config.synthetic.entities = 30;
        config.synthetic.triples = 260;
        config.synthetic.relations = 4;
        config.synthetic.snapshots = 2;
        config.hp.dim = 8;
        config.hp.epochs = 3;
        config.hp.clusters = 4;
        config.hp.batch_size = 64;
        config.output_dir = dir.to_path_buf();
        config
    }

    #[test]
    fn a_run_produces_every_artifact_and_a_clean_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let config = tiny_config(&tmp.path().join("run"));
        let outcome = run_training::<f64>(&config).unwrap();
        assert_eq!(outcome.report.reports.len(), 2);
        assert_eq!(outcome.report.reports[1].per_test.len(), 2);

        for file in [
            CONFIG_FILE,
            TRAIN_LOG_FILE,
            METRICS_JSON_FILE,
            METRICS_CSV_FILE,
            &checkpoint_file(0),
            &checkpoint_file(1),
            &clusters_file(0),
            &clusters_file(1),
        ] {
            assert!(outcome.run_dir.join(file).exists(), "missing {file}");
        }
        let manifest = Manifest::read(&outcome.run_dir).unwrap();
        assert_eq!(manifest.snapshots_completed, 2);
        assert_eq!(manifest.failure, None);
        manifest.verify_all(&outcome.run_dir).unwrap();

        let log = fs::read_to_string(outcome.run_dir.join(TRAIN_LOG_FILE)).unwrap();
        assert_eq!(log.lines().count(), 6, "3 epochs x 2 snapshots");
    }

    #[test]
    fn metrics_are_byte_identical_across_reruns() {
        let tmp = tempfile::tempdir().unwrap();
        let first = tiny_config(&tmp.path().join("a"));
        let mut second = tiny_config(&tmp.path().join("b"));
        run_training::<f64>(&first).unwrap();
        run_training::<f64>(&second).unwrap();
        for file in [METRICS_JSON_FILE, METRICS_CSV_FILE] {
            let a = fs::read(tmp.path().join("a").join(file)).unwrap();
            let b = fs::read(tmp.path().join("b").join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identical runs");
        }
        // Different seed, different metrics: the comparison above is not
        // vacuous.
        second.hp.seed = 43;
        second.output_dir = tmp.path().join("c");
        run_training::<f64>(&second).unwrap();
        let b = fs::read(tmp.path().join("b").join(METRICS_JSON_FILE)).unwrap();
        let c = fs::read(tmp.path().join("c").join(METRICS_JSON_FILE)).unwrap();
        assert_ne!(b, c);
    }

    #[test]
    fn disabling_clustering_skips_the_cluster_dumps() {
        let tmp = tempfile::tempdir().unwrap();
        let mut config = tiny_config(&tmp.path().join("run"));
        config.options.disable_fcc = true;
        let outcome = run_training::<f64>(&config).unwrap();
        assert!(!outcome.run_dir.join(clusters_file(0)).exists());
        assert!(outcome.run_dir.join(checkpoint_file(0)).exists());
    }

    #[test]
    fn a_failed_snapshot_is_recorded_in_the_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let mut config = tiny_config(&tmp.path().join("run"));
        config.hp.learning_rate = 1e300;
        let err = run_training::<f64>(&config).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        let manifest = Manifest::read(&tmp.path().join("run")).unwrap();
        assert_eq!(manifest.snapshots_completed, 0);
        let failure = manifest.failure.expect("failure should be recorded");
        assert!(failure.contains("snapshot 0"));
    }

    #[test]
    fn checkpoint_evaluation_reproduces_the_training_report() {
        let tmp = tempfile::tempdir().unwrap();
        let config = tiny_config(&tmp.path().join("run"));
        let outcome = run_training::<f64>(&config).unwrap();
        let sequence = load_data(&config).unwrap();
        for t in 0..2 {
            let report = evaluate_checkpoint(
                &outcome.run_dir.join(checkpoint_file(t)),
                &sequence,
                config.protocol,
            )
            .unwrap();
            assert_eq!(report, outcome.report.reports[t]);
        }
    }

    #[test]
    fn checkpoint_evaluation_refuses_a_foreign_dataset() {
        let tmp = tempfile::tempdir().unwrap();
        let config = tiny_config(&tmp.path().join("run"));
        let outcome = run_training::<f64>(&config).unwrap();
        let mut other = config.clone();
        other.synthetic.seed = 99;
        let foreign = load_data(&other).unwrap();
        let err = evaluate_checkpoint(
            &outcome.run_dir.join(checkpoint_file(1)),
            &foreign,
            config.protocol,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Checkpoint(CheckpointError::VocabMismatch { .. })
        ));
    }

    #[test]
    fn checkpoint_evaluation_refuses_a_tampered_checkpoint() {
        let tmp = tempfile::tempdir().unwrap();
        let config = tiny_config(&tmp.path().join("run"));
        let outcome = run_training::<f64>(&config).unwrap();
        let path = outcome.run_dir.join(checkpoint_file(1));
        let mut bytes = fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 0xff;
        fs::write(&path, bytes).unwrap();
        let sequence = load_data(&config).unwrap();
        let err = evaluate_checkpoint(&path, &sequence, config.protocol).unwrap_err();
        assert!(matches!(
            err,
            Error::Checkpoint(CheckpointError::ManifestMismatch { .. })
        ));
    }

    #[test]
    fn runs_work_from_a_directory_source_too() {
        let tmp = tempfile::tempdir().unwrap();
        let config = tiny_config(&tmp.path().join("unused"));
        let sequence = load_data(&config).unwrap();
        let data_dir = tmp.path().join("corpus");
        write_snapshot_sequence(&sequence, &data_dir).unwrap();

        let mut from_disk = config.clone();
        from_disk.data_dir = Some(data_dir);
        from_disk.output_dir = tmp.path().join("disk_run");
        let a = run_training::<f64>(&from_disk).unwrap();

        let mut from_generator = config.clone();
        from_generator.output_dir = tmp.path().join("gen_run");
        let b = run_training::<f64>(&from_generator).unwrap();
        assert_eq!(a.report, b.report);
    }

    #[test]
    fn seed_sweeps_average_the_per_seed_reports() {
        let tmp = tempfile::tempdir().unwrap();
        let mut config = tiny_config(&tmp.path().join("sweep"));
        config.hp.epochs = 2;
        let outcome = run_seed_sweep::<f64>(&config, 3).unwrap();
        assert_eq!(outcome.runs.len(), 3);
        for seed in 42..45 {
            assert!(outcome.base_dir.join(format!("seed_{seed}")).exists());
        }
        assert!(outcome.base_dir.join(MEAN_METRICS_JSON_FILE).exists());

        let by_hand: f64 = outcome
            .runs
            .iter()
            .map(|run| run.report.reports[1].average.mrr)
            .sum::<f64>()
            / 3.0;
        let mean = outcome.mean.reports[1].average.mrr;
        assert!((mean - by_hand).abs() < 1e-12);
    }

    #[test]
    fn averaging_rejects_mismatched_shapes() {
        let tmp = tempfile::tempdir().unwrap();
        let config = tiny_config(&tmp.path().join("run"));
        let outcome = run_training::<f64>(&config).unwrap();
        let mut shorter = outcome.report.clone();
        shorter.reports.pop();
        assert!(average_reports(&[outcome.report, shorter]).is_err());
    }
}
