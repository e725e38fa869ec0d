use std::collections::VecDeque;

use rand::seq::SliceRandom;

use crate::cluster::AdjacencyGraph;
use crate::error::ModelError;
use crate::scalar::{Accum, Real};
use crate::seeding::{rng_for, Stream};

/// Degree of `node` normalized by the `N - 1` possible neighbors.
pub fn neighbor_centrality<T: Real>(
    graph: &AdjacencyGraph,
    node: u32,
) -> Result<T, ModelError> {
    let n = graph.num_nodes();
    if n < 2 {
        return Err(ModelError::TooFewEntities);
    }
    Ok(T::from_usize(graph.degree(node)).unwrap() / T::from_usize(n - 1).unwrap())
}

/// Source selection for betweenness accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetweennessMode {
    /// Accumulate over every node; exact pair-dependency sums.
    Exact,
    /// Accumulate over a random subset of `pivots` sources and rescale by
    /// `n / pivots`. Falls back to exact when `pivots >= n`.
    Sampled { pivots: usize, seed: u64 },
}

/// Betweenness of every node over unordered node pairs, endpoints excluded.
///
/// Single-source dependency accumulation on the unweighted graph. The scalar
/// only needs field arithmetic, so exact rational types yield exact path
/// ratios; floats yield the usual approximation. Each unordered pair is
/// visited once from either endpoint, hence the final halving.
pub fn betweenness_centrality<T: Accum>(
    graph: &AdjacencyGraph,
    mode: BetweennessMode,
) -> Vec<T> {
    let n = graph.num_nodes();
    let mut centrality = vec![T::zero(); n];

    let sources: Vec<u32> = match mode {
        BetweennessMode::Sampled { pivots, seed } if pivots < n => {
            let mut ids: Vec<u32> = (0..n as u32).collect();
            ids.shuffle(&mut rng_for(seed, Stream::Pivots, &[]));
            ids.truncate(pivots);
            ids
        }
        _ => (0..n as u32).collect(),
    };
    let num_sources = sources.len();
    if num_sources == 0 {
        return centrality;
    }

    let mut order: Vec<u32> = Vec::with_capacity(n);
    let mut predecessors: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut paths: Vec<T> = vec![T::zero(); n];
    let mut distance: Vec<i32> = vec![-1; n];
    let mut dependency: Vec<T> = vec![T::zero(); n];
    let mut queue: VecDeque<u32> = VecDeque::new();

    for &source in &sources {
        order.clear();
        queue.clear();
        for node in 0..n {
            predecessors[node].clear();
            paths[node] = T::zero();
            distance[node] = -1;
            dependency[node] = T::zero();
        }
        paths[source as usize] = T::one();
        distance[source as usize] = 0;
        queue.push_back(source);

        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in graph.neighbors(v) {
                if distance[w as usize] < 0 {
                    distance[w as usize] = distance[v as usize] + 1;
                    queue.push_back(w);
                }
                if distance[w as usize] == distance[v as usize] + 1 {
                    let add = paths[v as usize].clone();
                    paths[w as usize] += add;
                    predecessors[w as usize].push(v);
                }
            }
        }

        for &w in order.iter().rev() {
            for i in 0..predecessors[w as usize].len() {
                let v = predecessors[w as usize][i];
                let share = paths[v as usize].clone() / paths[w as usize].clone()
                    * (T::one() + dependency[w as usize].clone());
                dependency[v as usize] += share;
            }
            if w != source {
                let add = dependency[w as usize].clone();
                centrality[w as usize] += add;
            }
        }
    }

    let half = T::one() + T::one();
    let scale = T::from_usize(n).unwrap() / T::from_usize(num_sources).unwrap();
    for value in centrality.iter_mut() {
        let scaled = value.clone() * scale.clone() / half.clone();
        *value = scaled;
    }
    centrality
}

/// Importance of every entity: normalized degree plus betweenness.
///
/// Raw betweenness grows with graph size, so on large graphs it dominates
/// the ranking, which is intended: hubs and bridges sort first.
pub fn importance_scores<T: Real>(
    graph: &AdjacencyGraph,
    mode: BetweennessMode,
) -> Result<Vec<T>, ModelError> {
    let n = graph.num_nodes();
    if n < 2 {
        return Err(ModelError::TooFewEntities);
    }
    let betweenness: Vec<T> = betweenness_centrality(graph, mode);
    (0..n as u32)
        .map(|node| Ok(neighbor_centrality::<T>(graph, node)? + betweenness[node as usize]))
        .collect()
}
