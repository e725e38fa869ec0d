use std::collections::BTreeMap;

use crate::scalar::Real;
use crate::store::ValueTable;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// First and second moment estimates for one parameter table.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamMoments<T> {
    first: ValueTable<T>,
    second: ValueTable<T>,
}

impl<T: Real> AdamMoments<T> {
    pub fn new(rows: usize, dim: usize) -> Self {
        AdamMoments {
            first: ValueTable::zeros(rows, dim),
            second: ValueTable::zeros(rows, dim),
        }
    }

    /// Extends moment storage with zeros for newly created rows.
    pub fn grow_to(&mut self, rows: usize) {
        self.first.grow_to(rows);
        self.second.grow_to(rows);
    }
}

/// One lazy Adam step over the rows present in `grads`.
///
/// Untouched rows keep their moments and see no update at all; touched rows
/// use the shared 1-based `step` for bias correction. The update follows the
/// standard form `m_hat / (sqrt(v_hat) + eps)`; on a row's very first step
/// this reduces to `lr * g / (|g| + eps)` componentwise.
pub fn adam_step_sparse<T: Real>(
    params: &mut ValueTable<T>,
    moments: &mut AdamMoments<T>,
    grads: &BTreeMap<u32, Vec<T>>,
    learning_rate: T,
    step: u64,
) {
    debug_assert!(step >= 1);
    let beta1 = T::from_f64_lossy(ADAM_BETA1);
    let beta2 = T::from_f64_lossy(ADAM_BETA2);
    let epsilon = T::from_f64_lossy(ADAM_EPSILON);
    let one = T::one();
    let bias1 = one - T::from_f64_lossy(ADAM_BETA1.powi(step as i32));
    let bias2 = one - T::from_f64_lossy(ADAM_BETA2.powi(step as i32));

    for (&id, grad) in grads {
        let first = moments.first.row_mut(id);
        let second = moments.second.row_mut(id);
        let row = params.row_mut(id);
        for i in 0..grad.len() {
            let g = grad[i];
            first[i] = beta1 * first[i] + (one - beta1) * g;
            second[i] = beta2 * second[i] + (one - beta2) * g * g;
            let first_hat = first[i] / bias1;
            let second_hat = second[i] / bias2;
            row[i] = row[i] - learning_rate * first_hat / (second_hat.sqrt() + epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_step_is_a_normalized_gradient_step() {
        let mut params = ValueTable::from_rows(2, vec![1.0f64, -1.0]).unwrap();
        let mut moments = AdamMoments::new(1, 2);
        let mut grads = BTreeMap::new();
        grads.insert(0u32, vec![0.3, -0.02]);
        adam_step_sparse(&mut params, &mut moments, &grads, 0.1, 1);
        for (i, &g) in [0.3f64, -0.02].iter().enumerate() {
            let expected = [1.0, -1.0][i] - 0.1 * g / (g.abs() + ADAM_EPSILON);
            assert_relative_eq!(params.row(0)[i], expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn untouched_rows_do_not_move() {
        let mut params = ValueTable::from_rows(1, vec![5.0f64, 6.0, 7.0]).unwrap();
        let mut moments = AdamMoments::new(3, 1);
        let mut grads = BTreeMap::new();
        grads.insert(1u32, vec![1.0]);
        adam_step_sparse(&mut params, &mut moments, &grads, 0.1, 1);
        assert_eq!(params.row(0), &[5.0]);
        assert_ne!(params.row(1), &[6.0]);
        assert_eq!(params.row(2), &[7.0]);
    }

    #[test]
    fn repeated_steps_approach_a_quadratic_minimum() {
        // Minimize (x - 3)^2 for a single parameter via its gradient.
        let mut params = ValueTable::from_rows(1, vec![0.0f64]).unwrap();
        let mut moments = AdamMoments::new(1, 1);
        for step in 1..=2000u64 {
            let x = params.row(0)[0];
            let mut grads = BTreeMap::new();
            grads.insert(0u32, vec![2.0 * (x - 3.0)]);
            adam_step_sparse(&mut params, &mut moments, &grads, 0.01, step);
        }
        assert_relative_eq!(params.row(0)[0], 3.0, epsilon = 1e-2);
    }

    #[test]
    fn stale_rows_resume_under_the_global_step() {
        // Row 0 trains at steps 1..10, rests, then resumes at step 100
        // without its moments having decayed in between.
        let mut params = ValueTable::from_rows(1, vec![0.0f64]).unwrap();
        let mut moments = AdamMoments::new(1, 1);
        let mut grads = BTreeMap::new();
        grads.insert(0u32, vec![1.0]);
        for step in 1..=10u64 {
            adam_step_sparse(&mut params, &mut moments, &grads, 0.1, step);
        }
        let before = params.row(0)[0];
        adam_step_sparse(&mut params, &mut moments, &grads, 0.1, 100);
        let moved = (params.row(0)[0] - before).abs();
        assert!(moved > 0.0 && moved < 0.5, "moved {moved}");
    }

    #[test]
    fn growth_preserves_existing_moments() {
        let mut params = ValueTable::from_rows(1, vec![0.0f64]).unwrap();
        let mut moments = AdamMoments::new(1, 1);
        let mut grads = BTreeMap::new();
        grads.insert(0u32, vec![1.0]);
        adam_step_sparse(&mut params, &mut moments, &grads, 0.1, 1);
        let saved = moments.clone();
        moments.grow_to(4);
        assert_eq!(moments.first.row(0), saved.first.row(0));
        assert_eq!(moments.second.row(3), &[0.0]);
    }
}
