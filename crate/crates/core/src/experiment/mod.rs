//! Reproducible runs: config files, the snapshot training pipeline, run
//! directory artifacts with a hashed manifest, and report rendering.

mod config;
mod manifest;
mod report;
mod run;

pub use config::RunConfig;
pub use manifest::{
    sha256_file, verify_against_manifest_if_present, Manifest, ManifestEntry, MANIFEST_FILE,
};
pub use report::{long_csv, render_comparison, render_single, NamedReport};
pub use run::{
    average_reports, checkpoint_file, clusters_file, evaluate_checkpoint, load_data,
    load_run_report, run_seed_sweep, run_training, RunOutcome, SweepOutcome, CONFIG_FILE,
    MEAN_METRICS_CSV_FILE, MEAN_METRICS_JSON_FILE, METRICS_CSV_FILE, METRICS_JSON_FILE,
    TRAIN_LOG_FILE,
};
