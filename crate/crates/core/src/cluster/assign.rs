use crate::scalar::Real;

/// Entity ids sorted by descending importance, ties broken by ascending id.
/// The tie rule keeps the order, and everything built on it, deterministic.
pub fn importance_order<T: Real>(scores: &[T]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..scores.len() as u32).collect();
    order.sort_by(|&a, &b| {
        scores[b as usize]
            .partial_cmp(&scores[a as usize])
            .expect("importance scores are finite")
            .then_with(|| a.cmp(&b))
    });
    order
}

/// Cuts the ranked entities into `k` fixed-size blocks of `ceil(n / k)`.
///
/// Consecutive ranks share a cluster, so each cluster holds entities of
/// comparable importance. Trailing clusters may be smaller or empty when the
/// division is uneven. Returns the assignment indexed by entity id and the
/// per-cluster sizes.
pub fn assign_clusters(ordered: &[u32], k: usize) -> (Vec<u32>, Vec<usize>) {
    debug_assert!(k > 0);
    let n = ordered.len();
    let block = n.div_ceil(k).max(1);
    let mut assignment = vec![0u32; n];
    let mut sizes = vec![0usize; k];
    for (position, &entity) in ordered.iter().enumerate() {
        let cluster = position / block;
        assignment[entity as usize] = cluster as u32;
        sizes[cluster] += 1;
    }
    (assignment, sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_descending_with_id_ties() {
        let scores = [0.5f64, 2.0, 0.5, 3.0];
        assert_eq!(importance_order(&scores), vec![3, 1, 0, 2]);
    }

    #[test]
    fn ten_entities_in_three_clusters_split_4_4_2() {
        let ordered: Vec<u32> = (0..10).collect();
        let (assignment, sizes) = assign_clusters(&ordered, 3);
        assert_eq!(sizes, vec![4, 4, 2]);
        assert_eq!(assignment[0], 0);
        assert_eq!(assignment[3], 0);
        assert_eq!(assignment[4], 1);
        assert_eq!(assignment[8], 2);
    }

    #[test]
    fn more_clusters_than_entities_leaves_trailing_empties() {
        let ordered: Vec<u32> = (0..3).collect();
        let (assignment, sizes) = assign_clusters(&ordered, 5);
        assert_eq!(sizes, vec![1, 1, 1, 0, 0]);
        assert_eq!(assignment, vec![0, 1, 2]);
    }

    #[test]
    fn assignment_follows_rank_not_id() {
        // Entity 7 is most important, so it lands in cluster 0.
        let ordered = vec![7u32, 0, 1, 2, 3, 4, 5, 6];
        let (assignment, _) = assign_clusters(&ordered, 4);
        assert_eq!(assignment[7], 0);
        assert_eq!(assignment[0], 0);
        assert_eq!(assignment[1], 1);
    }

    #[test]
    fn single_cluster_takes_everything() {
        let ordered: Vec<u32> = (0..6).collect();
        let (assignment, sizes) = assign_clusters(&ordered, 1);
        assert!(assignment.iter().all(|&c| c == 0));
        assert_eq!(sizes, vec![6]);
    }
}
