//! Bayesian embedding store.
//!
//! Every entity and relation embedding is a diagonal Gaussian: a mean vector
//! and a per-component precision. Training optimizes point estimates; when a
//! snapshot finishes, each trained vector is folded into its Gaussian as a
//! fixed-precision observation, which has a closed-form conjugate update.
//! During the next snapshot the stored means and precisions act as a
//! quadratic prior on the parameters, pulling them back toward what earlier
//! snapshots learned in proportion to how certain the store already is.

mod hyper;
mod regularizer;
mod table;
mod update;

pub use hyper::{AlphaMode, Hyperparameters};
pub use regularizer::{bayes_reg_loss, bayes_reg_loss_component};
pub use table::{GaussianTable, TableKind, ValueTable};
pub use update::{posterior_update, posterior_update_component, BayesianStore, TrainedValues};
