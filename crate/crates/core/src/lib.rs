//! Continual knowledge-graph embedding over a sequence of graph snapshots.
//!
//! The engine trains translational embeddings snapshot by snapshot and carries
//! knowledge forward in two ways: every embedding is a diagonal Gaussian whose
//! posterior is updated in closed form when a snapshot finishes ([`store`]),
//! and entities are grouped by structural importance into clusters whose
//! centroids anchor a contrastive regularizer during later training
//! ([`cluster`]). Link-prediction quality on all past test sets measures how
//! much the model forgets ([`eval`]).
//!
//! Numeric kernels are generic over the scalar type through [`scalar::Real`];
//! the aliases below fix the default precision used by the pipeline and CLI.

pub mod checkpoint;
pub mod cluster;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod kg;
pub mod scalar;
pub mod seeding;
pub mod store;
pub mod trainer;

pub use error::Error;

/// Default scalar for training and evaluation.
pub type Scalar = f64;

/// Gaussian embedding store at default precision.
pub type BayesianStore = store::BayesianStore<Scalar>;
/// Dense value table at default precision.
pub type ValueTable = store::ValueTable<Scalar>;
/// Cluster state at default precision.
pub type ClusterState = cluster::ClusterState<Scalar>;
