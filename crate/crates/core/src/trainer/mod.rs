//! Snapshot training: translational scoring, margin ranking, sparse Adam.
//!
//! Each snapshot is trained on its own new triples, starting from the means
//! the Bayesian store carried over. Three loss terms add up: the margin
//! ranking loss over corrupted triples, the quadratic pull toward stored
//! posteriors, and the contrastive clustering term. Gradients are sparse,
//! and so is the optimizer: only rows touched by a step advance, under one
//! global step counter for bias correction.

mod adam;
mod gradients;
mod score;
mod train;

pub use adam::{adam_step_sparse, AdamMoments, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
pub use gradients::{kge_batch_gradients, SparseGrad, TrainingPair};
pub use score::{margin_loss, transe_score};
pub use train::{train_snapshot, EpochRecord, TrainOptions, TrainedSnapshot};
