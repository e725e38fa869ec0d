use crate::scalar::Real;

/// Translational plausibility: `|head + relation - tail|_2`. Lower scores
/// mean more plausible triples.
pub fn transe_score<T: Real>(head: &[T], relation: &[T], tail: &[T]) -> T {
    debug_assert_eq!(head.len(), relation.len());
    debug_assert_eq!(head.len(), tail.len());
    head.iter()
        .zip(relation)
        .zip(tail)
        .map(|((&h, &r), &t)| {
            let d = h + r - t;
            d * d
        })
        .sum::<T>()
        .sqrt()
}

/// Hinged ranking loss `max(0, margin + positive - negative)`; zero exactly
/// when the negative score clears the positive by at least the margin.
pub fn margin_loss<T: Real>(positive: T, negative: T, margin: T) -> T {
    (margin + positive - negative).max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_translation_scores_zero() {
        let head = [0.1f64, -0.2, 0.3];
        let relation = [0.5f64, 0.5, -0.5];
        let tail: Vec<f64> = head.iter().zip(&relation).map(|(&h, &r)| h + r).collect();
        assert_relative_eq!(transe_score(&head, &relation, &tail), 0.0);
    }

    #[test]
    fn score_is_the_euclidean_residual() {
        let head = [1.0f64, 0.0];
        let relation = [0.0f64, 1.0];
        let tail = [0.0f64, 0.0];
        assert_relative_eq!(transe_score(&head, &relation, &tail), (2.0f64).sqrt());
    }

    #[test]
    fn hinge_clamps_at_zero() {
        assert_eq!(margin_loss(0.1f64, 5.0, 1.0), 0.0);
        assert_relative_eq!(margin_loss(1.0f64, 0.5, 1.0), 1.5);
        // Boundary: the negative clears the positive by exactly the margin.
        assert_eq!(margin_loss(1.0f64, 2.0, 1.0), 0.0);
    }

    #[test]
    fn loss_decreases_as_the_negative_gets_worse() {
        let fixed_positive = 0.7f64;
        let mut last = f64::INFINITY;
        for negative in [0.5, 1.0, 1.5, 2.0] {
            let loss = margin_loss(fixed_positive, negative, 1.0);
            assert!(loss <= last);
            last = loss;
        }
    }
}
