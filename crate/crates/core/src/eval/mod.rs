//! Link-prediction evaluation across snapshots.
//!
//! Quality is measured by ranking the true entity of held-out triples
//! against every entity known to the model, optionally filtering candidates
//! that form other true triples. A model trained through snapshot `i` is
//! evaluated on the test sets of all snapshots `j <= i`; how the old test
//! sets hold up as `i` advances is the forgetting signal.

mod continual;
mod metrics;
mod rank;

pub use continual::{continual_evaluate, MetricsReport, RunReport, SnapshotMetrics};
pub use metrics::{link_prediction_metrics, LinkMetrics};
pub use rank::{rank_from_scores, rank_query, Protocol, QuerySide};
