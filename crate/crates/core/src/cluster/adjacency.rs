use std::collections::BTreeSet;

use crate::kg::Triple;

/// Undirected view of a triple set for centrality computation.
///
/// Edge direction and relation labels are dropped, parallel edges collapse,
/// and self-loops are ignored since they contribute nothing to shortest
/// paths. Nodes without edges are kept so ids stay aligned with entity ids.
#[derive(Debug, Clone)]
pub struct AdjacencyGraph {
    neighbors: Vec<Vec<u32>>,
}

impl AdjacencyGraph {
    pub fn from_triples<'a>(
        triples: impl IntoIterator<Item = &'a Triple>,
        num_entities: usize,
    ) -> Self {
        let mut sets: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); num_entities];
        for triple in triples {
            if triple.head == triple.tail {
                continue;
            }
            debug_assert!((triple.head as usize) < num_entities);
            debug_assert!((triple.tail as usize) < num_entities);
            sets[triple.head as usize].insert(triple.tail);
            sets[triple.tail as usize].insert(triple.head);
        }
        AdjacencyGraph {
            neighbors: sets
                .into_iter()
                .map(|set| set.into_iter().collect())
                .collect(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.neighbors.len()
    }

    pub fn degree(&self, node: u32) -> usize {
        self.neighbors[node as usize].len()
    }

    /// Neighbor ids in ascending order.
    pub fn neighbors(&self, node: u32) -> &[u32] {
        &self.neighbors[node as usize]
    }
}
