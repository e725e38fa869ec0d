use crate::scalar::{dot, l2_norm, Real};

/// Norm threshold below which a vector is treated as directionless: its
/// cosine is defined as zero and it receives no contrastive gradient.
pub const DEGENERATE_NORM_FLOOR: f64 = 1e-12;

/// Cosine similarity with the degenerate-norm convention above.
pub fn cosine_similarity<T: Real>(a: &[T], b: &[T]) -> T {
    let floor = T::from_f64_lossy(DEGENERATE_NORM_FLOOR);
    let norm_a = l2_norm(a);
    let norm_b = l2_norm(b);
    if norm_a <= floor || norm_b <= floor {
        return T::zero();
    }
    dot(a, b) / (norm_a * norm_b)
}

/// Softmax contrastive pull of `x` toward its own centroid.
///
/// `centroids` holds the active centroids, `own` the position of the cluster
/// `x` belongs to. The loss is the negative log-probability of the own
/// centroid under a temperature softmax over cosine similarities; the
/// returned gradient is with respect to `x` only, centroids are deliberately
/// excluded from differentiation. With a single active centroid the term is
/// exactly zero.
pub fn contrastive_term<T: Real>(x: &[T], own: usize, centroids: &[&[T]], tau: T) -> (T, Vec<T>) {
    debug_assert!(own < centroids.len());
    debug_assert!(tau > T::zero());
    let floor = T::from_f64_lossy(DEGENERATE_NORM_FLOOR);
    let norm_x = l2_norm(x);
    let x_degenerate = norm_x <= floor;

    let mut similarities = Vec::with_capacity(centroids.len());
    let mut logits = Vec::with_capacity(centroids.len());
    for &centroid in centroids {
        let similarity = cosine_similarity(x, centroid);
        similarities.push(similarity);
        logits.push(similarity / tau);
    }

    let max_logit = logits
        .iter()
        .copied()
        .fold(T::neg_infinity(), |acc, l| if l > acc { l } else { acc });
    let mut normalizer = T::zero();
    for &logit in &logits {
        normalizer += (logit - max_logit).exp();
    }
    let loss = max_logit + normalizer.ln() - logits[own];

    let mut grad = vec![T::zero(); x.len()];
    if !x_degenerate {
        let inv_norm_sq = T::one() / (norm_x * norm_x);
        for (j, &centroid) in centroids.iter().enumerate() {
            let probability = (logits[j] - max_logit).exp() / normalizer;
            let indicator = if j == own { T::one() } else { T::zero() };
            let coefficient = (probability - indicator) / tau;
            let norm_c = l2_norm(centroid);
            if norm_c <= floor {
                continue;
            }
            // d cos(x, c) / dx = c / (|x||c|) - cos(x, c) * x / |x|^2
            let inv_cross = T::one() / (norm_x * norm_c);
            for (slot, (&xi, &ci)) in grad.iter_mut().zip(x.iter().zip(centroid)) {
                *slot += coefficient * (ci * inv_cross - similarities[j] * xi * inv_norm_sq);
            }
        }
    }
    (loss, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cosine_of_aligned_and_opposed_vectors() {
        assert_relative_eq!(cosine_similarity(&[1.0f64, 0.0], &[2.0, 0.0]), 1.0);
        assert_relative_eq!(cosine_similarity(&[1.0f64, 0.0], &[-3.0, 0.0]), -1.0);
        assert_relative_eq!(cosine_similarity(&[1.0f64, 0.0], &[0.0, 5.0]), 0.0);
    }

    #[test]
    fn near_zero_vectors_read_as_orthogonal() {
        let tiny = [1e-13f64, 0.0];
        assert_eq!(cosine_similarity(&tiny, &[1.0, 0.0]), 0.0);
    }

    #[test]
    fn two_cluster_example_matches_the_closed_form() {
        // Own similarity 1, other -1, tau 1: loss = ln(1 + e^{-2}).
        let x = [1.0f64, 0.0];
        let own = [2.0f64, 0.0];
        let other = [-1.0f64, 0.0];
        let (loss, _) = contrastive_term(&x, 0, &[&own, &other], 1.0);
        assert_relative_eq!(loss, (1.0 + (-2.0f64).exp()).ln(), max_relative = 1e-12);
    }

    #[test]
    fn single_active_centroid_gives_zero_loss_and_gradient() {
        let x = [0.3f64, -0.4];
        let c = [1.0f64, 1.0];
        let (loss, grad) = contrastive_term(&x, 0, &[&c], 0.7);
        assert_relative_eq!(loss, 0.0, epsilon = 1e-15);
        assert!(grad.iter().all(|&g| g.abs() < 1e-15));
    }

    #[test]
    fn loss_is_lower_when_x_sits_on_its_own_centroid() {
        let own = [1.0f64, 0.0];
        let other = [0.0f64, 1.0];
        let centroids = [&own[..], &other[..]];
        let (near, _) = contrastive_term(&[0.9, 0.1], 0, &centroids, 0.5);
        let (far, _) = contrastive_term(&[0.1, 0.9], 0, &centroids, 0.5);
        assert!(near < far);
    }

    #[test]
    fn degenerate_x_contributes_loss_but_no_gradient() {
        let own = [1.0f64, 0.0];
        let other = [0.0f64, 1.0];
        let (loss, grad) = contrastive_term(&[0.0, 0.0], 0, &[&own[..], &other[..]], 1.0);
        // All similarities are zero: uniform softmax over two clusters.
        assert_relative_eq!(loss, (2.0f64).ln(), max_relative = 1e-12);
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn sharper_temperature_increases_separation_pressure() {
        let own = [1.0f64, 0.2];
        let other = [0.2f64, 1.0];
        let x = [0.7f64, 0.6];
        let centroids = [&own[..], &other[..]];
        let (_, grad_soft) = contrastive_term(&x, 0, &centroids, 1.0);
        let (_, grad_sharp) = contrastive_term(&x, 0, &centroids, 0.1);
        let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm(&grad_sharp) > norm(&grad_soft));
    }
}
