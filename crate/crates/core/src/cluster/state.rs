use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::Normal;

use crate::cluster::{
    assign_clusters, contrastive_term, cosine_similarity, importance_order, importance_scores,
    AdjacencyGraph, BetweennessMode,
};
use crate::error::ModelError;
use crate::scalar::Real;
use crate::seeding::{derive_seed, rng_for, Stream};
use crate::store::{AlphaMode, Hyperparameters, ValueTable};

/// Standard deviation of the noise separating a fresh proxy from its centroid.
const PROXY_INIT_STD: f64 = 0.01;

/// Contrastive loss value with its sparse gradients.
///
/// Gradients flow to member embeddings and to proxies; centroids never
/// receive any, they only move through the momentum update.
#[derive(Debug, Clone)]
pub struct FccGrads<T> {
    pub loss: T,
    pub entity_grads: BTreeMap<u32, Vec<T>>,
    pub proxy_grads: BTreeMap<u32, Vec<T>>,
}

/// Cluster structure of one snapshot: membership, centroids and proxies.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState<T> {
    assignment: Vec<u32>,
    importance: Vec<T>,
    sizes: Vec<usize>,
    centroids: ValueTable<T>,
    proxies: ValueTable<T>,
    active: Vec<bool>,
    /// Cluster was already active before this snapshot; such centroids can
    /// optionally be frozen.
    inherited: Vec<bool>,
}

impl<T: Real> ClusterState<T> {
    /// Builds the cluster structure for a starting snapshot.
    ///
    /// Entities are ranked by importance on `graph` and cut into fixed-size
    /// blocks. Clusters that were active in `previous` keep their centroid
    /// and proxy; clusters gaining their first members start from the mean
    /// of those members, with the proxy perturbed slightly off the centroid
    /// so the two can move apart.
    pub fn build_for_snapshot(
        previous: Option<&ClusterState<T>>,
        graph: &AdjacencyGraph,
        embeddings: &ValueTable<T>,
        hp: &Hyperparameters,
        snapshot: usize,
    ) -> Result<Self, ModelError> {
        let n = graph.num_nodes();
        if embeddings.len() != n {
            return Err(ModelError::DimMismatch {
                expected: n,
                got: embeddings.len(),
            });
        }
        if let Some(previous) = previous {
            if previous.num_clusters() != hp.clusters {
                return Err(ModelError::BadHyper(
                    "cluster count cannot change between snapshots".into(),
                ));
            }
        }

        let mode = if n <= hp.exact_betweenness_limit {
            BetweennessMode::Exact
        } else {
            BetweennessMode::Sampled {
                pivots: hp.betweenness_pivots,
                seed: derive_seed(hp.seed, Stream::Pivots, &[snapshot as u64]),
            }
        };
        let importance: Vec<T> = importance_scores(graph, mode)?;
        let order = importance_order(&importance);
        let (assignment, sizes) = assign_clusters(&order, hp.clusters);

        let dim = embeddings.dim();
        let mut centroids = ValueTable::zeros(hp.clusters, dim);
        let mut proxies = ValueTable::zeros(hp.clusters, dim);
        let mut active = vec![false; hp.clusters];
        let mut inherited = vec![false; hp.clusters];

        if let Some(previous) = previous {
            for k in 0..hp.clusters {
                if previous.active[k] {
                    centroids
                        .row_mut(k as u32)
                        .copy_from_slice(previous.centroids.row(k as u32));
                    proxies
                        .row_mut(k as u32)
                        .copy_from_slice(previous.proxies.row(k as u32));
                    active[k] = true;
                    inherited[k] = true;
                }
            }
        }

        let member_means = member_means(&assignment, &sizes, embeddings, hp.clusters);
        for k in 0..hp.clusters {
            if sizes[k] == 0 || active[k] {
                continue;
            }
            let mean = &member_means[k];
            centroids.row_mut(k as u32).copy_from_slice(mean);
            let mut rng = rng_for(hp.seed, Stream::ProxyInit, &[snapshot as u64, k as u64]);
            let noise = Normal::new(0.0, PROXY_INIT_STD).expect("constant std is valid");
            let proxy_row = proxies.row_mut(k as u32);
            for (slot, &m) in proxy_row.iter_mut().zip(mean) {
                *slot = m + T::from_f64_lossy(rng.sample(noise));
            }
            active[k] = true;
        }

        Ok(ClusterState {
            assignment,
            importance,
            sizes,
            centroids,
            proxies,
            active,
            inherited,
        })
    }

    pub fn num_clusters(&self) -> usize {
        self.active.len()
    }

    pub fn num_entities(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn importance(&self) -> &[T] {
        &self.importance
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn is_active(&self, cluster: usize) -> bool {
        self.active[cluster]
    }

    pub fn centroid(&self, cluster: usize) -> Option<&[T]> {
        self.active[cluster].then(|| self.centroids.row(cluster as u32))
    }

    pub fn proxy(&self, cluster: usize) -> Option<&[T]> {
        self.active[cluster].then(|| self.proxies.row(cluster as u32))
    }

    pub(crate) fn proxies_mut(&mut self) -> &mut ValueTable<T> {
        &mut self.proxies
    }

    /// Per-cluster weight of the member term.
    pub fn alpha(&self, cluster: usize, mode: AlphaMode) -> T {
        match mode {
            AlphaMode::Uniform => T::one(),
            AlphaMode::InverseSize => {
                T::one() / T::from_usize(self.sizes[cluster].max(1)).unwrap()
            }
        }
    }

    /// Contrastive loss over the batch members plus every active proxy.
    ///
    /// `batch` is expected to be deduplicated; repeated ids would count
    /// twice. Gradients come back keyed by entity id and by cluster index.
    pub fn fcc_loss(
        &self,
        batch: &[u32],
        embeddings: &ValueTable<T>,
        tau: T,
        alpha_mode: AlphaMode,
    ) -> Result<FccGrads<T>, ModelError> {
        let (clusters, rows) = self.active_centroids();
        if clusters.is_empty() {
            return Err(ModelError::NoActiveCentroid);
        }
        let mut position = vec![usize::MAX; self.num_clusters()];
        for (index, &k) in clusters.iter().enumerate() {
            position[k] = index;
        }

        let mut loss = T::zero();
        let mut entity_grads: BTreeMap<u32, Vec<T>> = BTreeMap::new();
        for &entity in batch {
            let cluster = *self
                .assignment
                .get(entity as usize)
                .ok_or(ModelError::Unassigned(entity))?
                as usize;
            if position[cluster] == usize::MAX {
                return Err(ModelError::Unassigned(entity));
            }
            let alpha = self.alpha(cluster, alpha_mode);
            let (term, grad) =
                contrastive_term(embeddings.row(entity), position[cluster], &rows, tau);
            loss += alpha * term;
            let slot = entity_grads
                .entry(entity)
                .or_insert_with(|| vec![T::zero(); embeddings.dim()]);
            for (acc, g) in slot.iter_mut().zip(grad) {
                *acc += alpha * g;
            }
        }

        let mut proxy_grads: BTreeMap<u32, Vec<T>> = BTreeMap::new();
        for (index, &k) in clusters.iter().enumerate() {
            let (term, grad) = contrastive_term(self.proxies.row(k as u32), index, &rows, tau);
            loss += term;
            proxy_grads.insert(k as u32, grad);
        }

        Ok(FccGrads {
            loss,
            entity_grads,
            proxy_grads,
        })
    }

    /// Moves every active centroid toward the mean of its current members:
    /// `c <- (1 - eta) * c + eta * mean`. Memberless clusters and, when
    /// `freeze_inherited` is set, clusters carried over from earlier
    /// snapshots stay put. Centroids never receive gradients; this is their
    /// only motion.
    pub fn momentum_update(
        &mut self,
        embeddings: &ValueTable<T>,
        eta: T,
        freeze_inherited: bool,
    ) {
        let means = member_means(&self.assignment, &self.sizes, embeddings, self.num_clusters());
        let keep = T::one() - eta;
        for k in 0..self.num_clusters() {
            if !self.active[k] || self.sizes[k] == 0 || (freeze_inherited && self.inherited[k]) {
                continue;
            }
            let row = self.centroids.row_mut(k as u32);
            for (slot, &m) in row.iter_mut().zip(&means[k]) {
                *slot = keep * *slot + eta * m;
            }
        }
    }

    /// Reassigns every entity to its most cosine-similar active centroid,
    /// ties to the lowest cluster index. Applying it twice without moving
    /// anything changes nothing.
    pub fn reassign(&mut self, embeddings: &ValueTable<T>) -> Result<(), ModelError> {
        let (clusters, rows) = self.active_centroids();
        if clusters.is_empty() {
            return Err(ModelError::NoActiveCentroid);
        }
        let assignment: Vec<u32> = (0..self.assignment.len())
            .map(|entity| {
                let embedding = embeddings.row(entity as u32);
                let mut best = clusters[0];
                let mut best_similarity = cosine_similarity(embedding, rows[0]);
                for (index, &k) in clusters.iter().enumerate().skip(1) {
                    let similarity = cosine_similarity(embedding, rows[index]);
                    if similarity > best_similarity {
                        best = k;
                        best_similarity = similarity;
                    }
                }
                best as u32
            })
            .collect();
        let mut sizes = vec![0usize; self.num_clusters()];
        for &cluster in &assignment {
            sizes[cluster as usize] += 1;
        }
        self.assignment = assignment;
        self.sizes = sizes;
        Ok(())
    }

    fn active_centroids(&self) -> (Vec<usize>, Vec<&[T]>) {
        let clusters: Vec<usize> = (0..self.num_clusters())
            .filter(|&k| self.active[k])
            .collect();
        let rows: Vec<&[T]> = clusters
            .iter()
            .map(|&k| self.centroids.row(k as u32))
            .collect();
        (clusters, rows)
    }
}

fn member_means<T: Real>(
    assignment: &[u32],
    sizes: &[usize],
    embeddings: &ValueTable<T>,
    num_clusters: usize,
) -> Vec<Vec<T>> {
    let dim = embeddings.dim();
    let mut sums = vec![vec![T::zero(); dim]; num_clusters];
    for (entity, &cluster) in assignment.iter().enumerate() {
        let row = embeddings.row(entity as u32);
        for (slot, &v) in sums[cluster as usize].iter_mut().zip(row) {
            *slot += v;
        }
    }
    for (k, sum) in sums.iter_mut().enumerate() {
        if sizes[k] > 0 {
            let inv = T::one() / T::from_usize(sizes[k]).unwrap();
            for slot in sum.iter_mut() {
                *slot *= inv;
            }
        }
    }
    sums
}
