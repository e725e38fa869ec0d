use crate::error::ModelError;
use crate::scalar::Real;
use crate::store::{GaussianTable, TableKind, ValueTable};

/// One component of the conjugate Gaussian update.
///
/// A known-precision observation `obs` with precision `lambda_obs` folded
/// into the prior `N(mean, 1/prec)` yields the posterior
/// `N((prec * mean + lambda_obs * obs) / (prec + lambda_obs), 1 / (prec + lambda_obs))`.
/// Precisions add; means combine precision-weighted.
pub fn posterior_update_component<T: Real>(
    prior_mean: T,
    prior_prec: T,
    observation: T,
    lambda_obs: T,
) -> (T, T) {
    let post_prec = prior_prec + lambda_obs;
    let post_mean = (prior_prec * prior_mean + lambda_obs * observation) / post_prec;
    (post_mean, post_prec)
}

/// Componentwise conjugate update of a whole diagonal Gaussian.
///
/// `lambda_obs = 0` is a legal no-information observation and leaves the
/// Gaussian unchanged; a negative value is rejected, as is a prior that has
/// lost positivity.
pub fn posterior_update<T: Real>(
    prior_mean: &[T],
    prior_prec: &[T],
    observation: &[T],
    lambda_obs: T,
) -> Result<(Vec<T>, Vec<T>), ModelError> {
    if !(lambda_obs >= T::zero()) {
        return Err(ModelError::NegativeObservationPrecision(
            lambda_obs.to_f64_lossy(),
        ));
    }
    if prior_mean.len() != prior_prec.len() || prior_mean.len() != observation.len() {
        return Err(ModelError::DimMismatch {
            expected: prior_mean.len(),
            got: prior_prec.len().min(observation.len()),
        });
    }
    let mut means = Vec::with_capacity(prior_mean.len());
    let mut precs = Vec::with_capacity(prior_mean.len());
    for (component, ((&mean, &prec), &obs)) in
        prior_mean.iter().zip(prior_prec).zip(observation).enumerate()
    {
        if !(prec > T::zero()) {
            return Err(ModelError::NonPositivePrecision { component });
        }
        let (m, p) = posterior_update_component(mean, prec, obs, lambda_obs);
        means.push(m);
        precs.push(p);
    }
    Ok((means, precs))
}

/// The trained point estimates of one finished snapshot, with the ids that
/// actually took part in training.
pub struct TrainedValues<'a, T> {
    pub entity_values: &'a ValueTable<T>,
    pub relation_values: &'a ValueTable<T>,
    pub active_entities: &'a [u32],
    pub active_relations: &'a [u32],
}

/// The embedding Gaussians of all entities and relations seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesianStore<T> {
    pub entities: GaussianTable<T>,
    pub relations: GaussianTable<T>,
}

impl<T: Real> BayesianStore<T> {
    pub fn new(dim: usize) -> Self {
        BayesianStore {
            entities: GaussianTable::new(TableKind::Entity, dim),
            relations: GaussianTable::new(TableKind::Relation, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entities.dim()
    }

    /// Folds a finished snapshot into the store: every active id absorbs its
    /// trained vector as one observation of precision `lambda_obs`; ids that
    /// did not train keep their Gaussian untouched.
    pub fn commit_snapshot(
        &mut self,
        trained: &TrainedValues<'_, T>,
        lambda_obs: T,
    ) -> Result<(), ModelError> {
        Self::commit_table(
            &mut self.entities,
            trained.entity_values,
            trained.active_entities,
            lambda_obs,
        )?;
        Self::commit_table(
            &mut self.relations,
            trained.relation_values,
            trained.active_relations,
            lambda_obs,
        )
    }

    /// Ablation path: trained values replace the stored means outright and
    /// precisions are left alone, turning carry-over into plain fine-tuning.
    pub fn overwrite_means(&mut self, trained: &TrainedValues<'_, T>) -> Result<(), ModelError> {
        for table_pair in [
            (&mut self.entities, trained.entity_values, trained.active_entities),
            (
                &mut self.relations,
                trained.relation_values,
                trained.active_relations,
            ),
        ] {
            let (table, values, active) = table_pair;
            if values.dim() != table.dim() {
                return Err(ModelError::DimMismatch {
                    expected: table.dim(),
                    got: values.dim(),
                });
            }
            for &id in active {
                table.mean_mut(id).copy_from_slice(values.row(id));
            }
        }
        Ok(())
    }

    fn commit_table(
        table: &mut GaussianTable<T>,
        values: &ValueTable<T>,
        active: &[u32],
        lambda_obs: T,
    ) -> Result<(), ModelError> {
        if values.dim() != table.dim() {
            return Err(ModelError::DimMismatch {
                expected: table.dim(),
                got: values.dim(),
            });
        }
        for &id in active {
            let (means, precs) =
                posterior_update(table.mean(id), table.precision(id), values.row(id), lambda_obs)?;
            table.mean_mut(id).copy_from_slice(&means);
            table.precision_mut(id).copy_from_slice(&precs);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_precisions_average_the_means() {
        let (mean, prec) = posterior_update_component(0.0f64, 1.0, 2.0, 1.0);
        assert_relative_eq!(mean, 1.0);
        assert_relative_eq!(prec, 2.0);
    }

    #[test]
    fn zero_observation_precision_is_a_no_op() {
        let (means, precs) =
            posterior_update(&[0.3f64, -0.7], &[2.0, 5.0], &[9.9, 9.9], 0.0).unwrap();
        assert_eq!(means, vec![0.3, -0.7]);
        assert_eq!(precs, vec![2.0, 5.0]);
    }

    #[test]
    fn repeated_observations_concentrate_toward_them() {
        let mut mean = 0.0f64;
        let mut prec = 1.0f64;
        for _ in 0..200 {
            let (m, p) = posterior_update_component(mean, prec, 1.0, 1.0);
            mean = m;
            prec = p;
        }
        assert!(prec > 200.0);
        assert!((mean - 1.0).abs() < 1e-2);
    }

    #[test]
    fn negative_observation_precision_is_rejected() {
        let err = posterior_update(&[0.0f64], &[1.0], &[0.0], -0.5).unwrap_err();
        assert!(matches!(err, ModelError::NegativeObservationPrecision(_)));
    }

    #[test]
    fn broken_prior_precision_is_rejected() {
        let err = posterior_update(&[0.0f64, 0.0], &[1.0, 0.0], &[0.0, 0.0], 1.0).unwrap_err();
        assert!(matches!(
            err,
            ModelError::NonPositivePrecision { component: 1 }
        ));
    }

    #[test]
    fn commit_touches_only_active_ids() {
        let mut store: BayesianStore<f64> = BayesianStore::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        store.entities.init_new_ids(0..3, 1.0, &mut rng).unwrap();
        store.relations.init_new_ids(0..1, 1.0, &mut rng).unwrap();
        let untouched_mean = store.entities.mean(2).to_vec();

        let mut entity_values = store.entities.means_value_table();
        entity_values.row_mut(0).copy_from_slice(&[1.0, 1.0]);
        entity_values.row_mut(1).copy_from_slice(&[-1.0, 2.0]);
        let relation_values = store.relations.means_value_table();

        let trained = TrainedValues {
            entity_values: &entity_values,
            relation_values: &relation_values,
            active_entities: &[0, 1],
            active_relations: &[],
        };
        store.commit_snapshot(&trained, 1.0).unwrap();

        assert_eq!(store.entities.mean(2), untouched_mean.as_slice());
        assert_eq!(store.entities.precision(0), &[2.0, 2.0]);
        assert_eq!(store.relations.precision(0), &[1.0, 1.0]);
    }

    #[test]
    fn overwrite_means_keeps_precisions() {
        let mut store: BayesianStore<f64> = BayesianStore::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        store.entities.init_new_ids(0..1, 0.25, &mut rng).unwrap();
        store.relations.init_new_ids(0..1, 0.25, &mut rng).unwrap();

        let mut entity_values = store.entities.means_value_table();
        entity_values.row_mut(0).copy_from_slice(&[3.0, 4.0]);
        let relation_values = store.relations.means_value_table();
        let trained = TrainedValues {
            entity_values: &entity_values,
            relation_values: &relation_values,
            active_entities: &[0],
            active_relations: &[0],
        };
        store.overwrite_means(&trained).unwrap();
        assert_eq!(store.entities.mean(0), &[3.0, 4.0]);
        assert_eq!(store.entities.precision(0), &[0.25, 0.25]);
    }
}
