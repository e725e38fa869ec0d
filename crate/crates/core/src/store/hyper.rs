use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Weighting of the per-cluster entity term in the clustering loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaMode {
    /// Every cluster weighs its entity term with 1.
    Uniform,
    /// Cluster `k` weighs its entity term with `1 / N_k`, so small clusters
    /// count as much as large ones.
    InverseSize,
}

impl fmt::Display for AlphaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaMode::Uniform => write!(f, "uniform"),
            AlphaMode::InverseSize => write!(f, "inverse-size"),
        }
    }
}

impl FromStr for AlphaMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(AlphaMode::Uniform),
            "inverse-size" | "inverse_size" => Ok(AlphaMode::InverseSize),
            other => Err(format!(
                "unknown alpha mode '{other}', expected uniform or inverse-size"
            )),
        }
    }
}

/// All training knobs of one run.
///
/// Values are stored as `f64` and converted to the active scalar type at the
/// point of use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Embedding dimension.
    pub dim: usize,
    /// Ranking margin between positive and negative scores.
    pub margin: f64,
    /// Precision assigned to a finished snapshot's trained values when they
    /// are folded into the store.
    pub lambda_obs: f64,
    /// Initial precision of a freshly created embedding.
    pub lambda_init: f64,
    /// Weight of the quadratic pull toward stored posteriors.
    pub beta: f64,
    /// Softmax temperature of the contrastive clustering loss.
    pub tau: f64,
    /// Number of clusters.
    pub clusters: usize,
    /// Momentum of the centroid update; 0 freezes centroids, 1 replaces them
    /// with the current member mean.
    pub eta: f64,
    /// Weighting of per-cluster entity terms.
    pub alpha_mode: AlphaMode,
    pub learning_rate: f64,
    /// Optimization epochs per snapshot.
    pub epochs: usize,
    pub batch_size: usize,
    /// Base seed; every random stream in a run derives from it.
    pub seed: u64,
    /// Negative samples drawn per positive triple.
    pub negatives: usize,
    /// Cluster membership is refreshed every this many epochs.
    pub reassign_every: usize,
    /// Renormalize entity embeddings to unit length after each epoch.
    pub normalize_entities: bool,
    /// Graphs up to this many entities use exact betweenness; larger ones
    /// fall back to pivot sampling.
    pub exact_betweenness_limit: usize,
    /// Pivot count for sampled betweenness.
    pub betweenness_pivots: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            dim: 32,
            margin: 1.0,
            lambda_obs: 1.0,
            lambda_init: 0.01,
            beta: 0.1,
            tau: 0.5,
            clusters: 16,
            eta: 0.1,
            alpha_mode: AlphaMode::InverseSize,
            learning_rate: 1e-3,
            epochs: 100,
            batch_size: 256,
            seed: 42,
            negatives: 1,
            reassign_every: 5,
            normalize_entities: false,
            exact_betweenness_limit: 2000,
            betweenness_pivots: 256,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: &str| Err(ModelError::BadHyper(msg.into()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if !(self.margin >= 0.0) {
            return bad("margin must be non-negative");
        }
        if !(self.lambda_obs >= 0.0) {
            return bad("lambda_obs must be non-negative");
        }
        if !(self.lambda_init > 0.0) {
            return bad("lambda_init must be positive");
        }
        if !(self.beta >= 0.0) {
            return bad("beta must be non-negative");
        }
        if !(self.tau > 0.0) {
            return bad("tau must be positive");
        }
        if self.clusters == 0 {
            return bad("clusters must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return bad("eta must lie in [0, 1]");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.negatives == 0 {
            return bad("negatives must be at least 1");
        }
        if self.reassign_every == 0 {
            return bad("reassign_every must be at least 1");
        }
        if self.betweenness_pivots == 0 {
            return bad("betweenness_pivots must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Hyperparameters::default().validate().unwrap();
    }

    #[test]
    fn out_of_range_values_are_named_in_the_error() {
        let mut hp = Hyperparameters::default();
        hp.tau = 0.0;
        let err = hp.validate().unwrap_err();
        assert!(err.to_string().contains("tau"));

        let mut hp = Hyperparameters::default();
        hp.eta = 1.5;
        assert!(hp.validate().is_err());

        let mut hp = Hyperparameters::default();
        hp.lambda_init = 0.0;
        assert!(hp.validate().is_err());
    }

    #[test]
    fn nan_hyperparameters_are_rejected() {
        let mut hp = Hyperparameters::default();
        hp.margin = f64::NAN;
        assert!(hp.validate().is_err());
    }

    #[test]
    fn alpha_mode_parses_both_spellings() {
        assert_eq!("uniform".parse::<AlphaMode>().unwrap(), AlphaMode::Uniform);
        assert_eq!(
            "inverse-size".parse::<AlphaMode>().unwrap(),
            AlphaMode::InverseSize
        );
        assert!("half".parse::<AlphaMode>().is_err());
    }
}
