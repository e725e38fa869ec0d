use crate::error::ModelError;
use crate::scalar::Real;
use crate::store::{GaussianTable, ValueTable};

/// One component of the carry-over penalty and its derivative:
/// `beta * prec * (value - mean)^2` and `2 * beta * prec * (value - mean)`.
pub fn bayes_reg_loss_component<T: Real>(value: T, mean: T, prec: T, beta: T) -> (T, T) {
    let diff = value - mean;
    let two = T::from_f64_lossy(2.0);
    (beta * prec * diff * diff, two * beta * prec * diff)
}

/// Quadratic pull of the current point estimates toward the stored
/// posterior, weighted per component by the stored precision.
///
/// Returns the total loss and a gradient table of the same shape as
/// `current`. Components the store is certain about resist movement; barely
/// constrained ones move freely. `beta = 0` switches the term off exactly.
pub fn bayes_reg_loss<T: Real>(
    current: &ValueTable<T>,
    prior: &GaussianTable<T>,
    beta: T,
) -> Result<(T, ValueTable<T>), ModelError> {
    if current.dim() != prior.dim() {
        return Err(ModelError::DimMismatch {
            expected: prior.dim(),
            got: current.dim(),
        });
    }
    if current.len() != prior.len() {
        return Err(ModelError::DimMismatch {
            expected: prior.len(),
            got: current.len(),
        });
    }
    let mut grad = ValueTable::zeros(current.len(), current.dim());
    let mut loss = T::zero();
    for id in 0..current.len() as u32 {
        let values = current.row(id);
        let means = prior.mean(id);
        let precs = prior.precision(id);
        let grad_row = grad.row_mut(id);
        for component in 0..values.len() {
            let prec = precs[component];
            if !(prec > T::zero()) {
                return Err(ModelError::NonPositivePrecision {
                    component: id as usize * current.dim() + component,
                });
            }
            let (l, g) =
                bayes_reg_loss_component(values[component], means[component], prec, beta);
            loss += l;
            grad_row[component] = g;
        }
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::TableKind;
    use approx::assert_relative_eq;

    fn prior_with(means: Vec<f64>, precs: Vec<f64>, dim: usize) -> GaussianTable<f64> {
        GaussianTable::from_raw(TableKind::Entity, dim, means, precs).unwrap()
    }

    #[test]
    fn loss_vanishes_at_the_prior_mean() {
        let prior = prior_with(vec![0.4, -0.2], vec![3.0, 7.0], 2);
        let current = ValueTable::from_rows(2, vec![0.4, -0.2]).unwrap();
        let (loss, grad) = bayes_reg_loss(&current, &prior, 0.5).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.as_slice().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn loss_matches_the_componentwise_closed_form() {
        let prior = prior_with(vec![1.0, 2.0], vec![4.0, 0.25], 2);
        let current = ValueTable::from_rows(2, vec![1.5, 0.0]).unwrap();
        let beta = 0.1;
        let (loss, grad) = bayes_reg_loss(&current, &prior, beta).unwrap();
        // 0.1 * (4 * 0.25 + 0.25 * 4) = 0.2
        assert_relative_eq!(loss, 0.2, max_relative = 1e-12);
        assert_relative_eq!(grad.row(0)[0], 2.0 * beta * 4.0 * 0.5, max_relative = 1e-12);
        assert_relative_eq!(grad.row(0)[1], 2.0 * beta * 0.25 * -2.0, max_relative = 1e-12);
    }

    #[test]
    fn beta_zero_disables_the_pull() {
        let prior = prior_with(vec![1.0], vec![100.0], 1);
        let current = ValueTable::from_rows(1, vec![50.0]).unwrap();
        let (loss, grad) = bayes_reg_loss(&current, &prior, 0.0).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(grad.row(0), &[0.0]);
    }

    #[test]
    fn higher_precision_means_stronger_pull() {
        let weak = prior_with(vec![0.0], vec![0.1], 1);
        let strong = prior_with(vec![0.0], vec![10.0], 1);
        let current = ValueTable::from_rows(1, vec![1.0]).unwrap();
        let (_, grad_weak) = bayes_reg_loss(&current, &weak, 1.0).unwrap();
        let (_, grad_strong) = bayes_reg_loss(&current, &strong, 1.0).unwrap();
        assert!(grad_strong.row(0)[0] > grad_weak.row(0)[0]);
    }

    #[test]
    fn mismatched_tables_are_rejected() {
        let prior = prior_with(vec![0.0, 0.0], vec![1.0, 1.0], 2);
        let current = ValueTable::from_rows(2, vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(bayes_reg_loss(&current, &prior, 1.0).is_err());
    }
}
