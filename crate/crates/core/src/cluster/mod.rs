//! Importance-ordered clustering and the contrastive anchor loss.
//!
//! When a snapshot starts, entities are ranked by structural importance
//! (normalized degree plus betweenness on the undirected graph of all
//! training triples so far) and cut into equally sized clusters in rank
//! order, so each cluster mixes comparably important entities. Each cluster
//! owns a centroid, updated with momentum and excluded from gradients, and a
//! trainable proxy vector. During training a softmax contrastive term pulls
//! member embeddings and the proxy toward their centroid and away from the
//! others, which anchors the geometry that earlier snapshots established.

mod adjacency;
mod assign;
mod centrality;
mod fcc;
mod state;

pub use adjacency::AdjacencyGraph;
pub use assign::{assign_clusters, importance_order};
pub use centrality::{
    betweenness_centrality, importance_scores, neighbor_centrality, BetweennessMode,
};
pub use fcc::{contrastive_term, cosine_similarity, DEGENERATE_NORM_FLOOR};
pub use state::{ClusterState, FccGrads};
