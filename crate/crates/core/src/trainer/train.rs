use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterState;
use crate::error::{LossTerm, ModelError};
use crate::kg::{sample_negative, SnapshotSequence, Triple};
use crate::scalar::{l2_norm, Real};
use crate::seeding::{rng_for, Stream};
use crate::store::{bayes_reg_loss, BayesianStore, Hyperparameters, ValueTable};
use crate::trainer::{adam_step_sparse, kge_batch_gradients, AdamMoments, TrainingPair};

/// Ablation switches for one training run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainOptions {
    /// Skip the pull toward stored posteriors; carry-over degenerates to
    /// plain fine-tuning.
    pub disable_bayes: bool,
    /// Skip clustering entirely: no cluster state, no contrastive term.
    pub disable_fcc: bool,
    /// Keep centroids inherited from earlier snapshots fixed during the
    /// momentum update.
    pub freeze_inherited_centroids: bool,
}

/// Loss breakdown of one epoch.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochRecord {
    pub snapshot: usize,
    pub epoch: usize,
    pub loss_kge: f64,
    pub loss_bayes: f64,
    pub loss_fcc: f64,
    pub loss_total: f64,
    /// Wall-clock seconds spent in this epoch. The only non-deterministic
    /// field; keep it out of anything that must reproduce bit for bit.
    pub wall_secs: f64,
}

/// Result of training one snapshot: final point estimates and which ids
/// actually trained.
#[derive(Debug, Clone)]
pub struct TrainedSnapshot<T> {
    pub entity_values: ValueTable<T>,
    pub relation_values: ValueTable<T>,
    pub active_entities: Vec<u32>,
    pub active_relations: Vec<u32>,
    pub epochs: Vec<EpochRecord>,
}

/// Trains one snapshot starting from the stored posterior means.
///
/// Each epoch shuffles the snapshot's training triples, corrupts every
/// positive into `hp.negatives` negatives rejected against the cumulative
/// training set, and applies sparse Adam to the summed gradients of the
/// ranking loss, the posterior pull (over every known id, each step) and the
/// contrastive term (batch entities plus all active proxies). Cluster
/// centroids move only through their momentum update after each epoch, with
/// membership refreshed every `hp.reassign_every` epochs. Optimizer state is
/// local to the snapshot; the step counter shared by all tables makes bias
/// correction consistent for rows that train intermittently.
///
/// All randomness derives from `hp.seed`, the snapshot index and the epoch,
/// so identical inputs retrain identically.
pub fn train_snapshot<T: Real>(
    sequence: &SnapshotSequence,
    snapshot: usize,
    store: &BayesianStore<T>,
    mut clusters: Option<&mut ClusterState<T>>,
    hp: &Hyperparameters,
    options: &TrainOptions,
) -> Result<TrainedSnapshot<T>, ModelError> {
    let snap = &sequence.snapshots[snapshot];
    if store.entities.len() != snap.num_entities || store.relations.len() != snap.num_relations {
        return Err(ModelError::DimMismatch {
            expected: snap.num_entities,
            got: store.entities.len(),
        });
    }

    let mut entity_values = store.entities.means_value_table();
    let mut relation_values = store.relations.means_value_table();
    let mut entity_moments = AdamMoments::new(entity_values.len(), hp.dim);
    let mut relation_moments = AdamMoments::new(relation_values.len(), hp.dim);
    let mut proxy_moments = AdamMoments::new(hp.clusters, hp.dim);

    let (active_entities, active_relations) = active_ids(&snap.train);
    let known_train = sequence.cumulative_train_set(snapshot);
    let num_candidates = snap.num_entities as u32;

    let margin = T::from_f64_lossy(hp.margin);
    let beta = T::from_f64_lossy(hp.beta);
    let tau = T::from_f64_lossy(hp.tau);
    let eta = T::from_f64_lossy(hp.eta);
    let learning_rate = T::from_f64_lossy(hp.learning_rate);

    let mut order: Vec<usize> = (0..snap.train.len()).collect();
    let mut epochs = Vec::with_capacity(hp.epochs);
    let mut step = 0u64;

    for epoch in 0..hp.epochs {
        let started = Instant::now();
        let mut shuffle_rng = rng_for(hp.seed, Stream::Shuffle, &[snapshot as u64, epoch as u64]);
        let mut negative_rng =
            rng_for(hp.seed, Stream::Negative, &[snapshot as u64, epoch as u64]);
        rand::seq::SliceRandom::shuffle(&mut order[..], &mut shuffle_rng);

        let mut epoch_kge = 0.0f64;
        let mut epoch_bayes = 0.0f64;
        let mut epoch_fcc = 0.0f64;

        for chunk in order.chunks(hp.batch_size) {
            let mut batch = Vec::with_capacity(chunk.len() * hp.negatives);
            for &index in chunk {
                let positive = snap.train[index];
                for _ in 0..hp.negatives {
                    let negative =
                        sample_negative(&positive, num_candidates, &known_train, &mut negative_rng);
                    batch.push(TrainingPair { positive, negative });
                }
            }

            let (kge_loss, mut grad) =
                kge_batch_gradients(&batch, &entity_values, &relation_values, margin);
            if !kge_loss.is_finite() || !grad.is_finite() {
                return Err(ModelError::NonFinite {
                    term: LossTerm::Kge,
                    snapshot,
                    epoch,
                });
            }
            epoch_kge += kge_loss.to_f64_lossy();

            if !options.disable_bayes {
                let (entity_loss, entity_grad) =
                    bayes_reg_loss(&entity_values, &store.entities, beta)?;
                let (relation_loss, relation_grad) =
                    bayes_reg_loss(&relation_values, &store.relations, beta)?;
                let total = entity_loss + relation_loss;
                if !total.is_finite() {
                    return Err(ModelError::NonFinite {
                        term: LossTerm::Bayes,
                        snapshot,
                        epoch,
                    });
                }
                epoch_bayes += total.to_f64_lossy();
                for id in 0..entity_grad.len() as u32 {
                    grad.add_entity(id, T::one(), entity_grad.row(id));
                }
                for id in 0..relation_grad.len() as u32 {
                    grad.add_relation(id, T::one(), relation_grad.row(id));
                }
            }

            let mut proxy_grads = None;
            if let Some(state) = clusters.as_deref_mut() {
                let batch_entities: BTreeSet<u32> = batch
                    .iter()
                    .flat_map(|pair| {
                        [
                            pair.positive.head,
                            pair.positive.tail,
                            pair.negative.head,
                            pair.negative.tail,
                        ]
                    })
                    .collect();
                let batch_entities: Vec<u32> = batch_entities.into_iter().collect();
                let fcc = state.fcc_loss(&batch_entities, &entity_values, tau, hp.alpha_mode)?;
                if !fcc.loss.is_finite() {
                    return Err(ModelError::NonFinite {
                        term: LossTerm::Fcc,
                        snapshot,
                        epoch,
                    });
                }
                epoch_fcc += fcc.loss.to_f64_lossy();
                for (id, values) in &fcc.entity_grads {
                    grad.add_entity(*id, T::one(), values);
                }
                proxy_grads = Some(fcc.proxy_grads);
            }

            step += 1;
            adam_step_sparse(
                &mut entity_values,
                &mut entity_moments,
                &grad.entities,
                learning_rate,
                step,
            );
            adam_step_sparse(
                &mut relation_values,
                &mut relation_moments,
                &grad.relations,
                learning_rate,
                step,
            );
            if let (Some(state), Some(proxy_grads)) = (clusters.as_deref_mut(), proxy_grads) {
                adam_step_sparse(
                    state.proxies_mut(),
                    &mut proxy_moments,
                    &proxy_grads,
                    learning_rate,
                    step,
                );
            }
        }

        if hp.normalize_entities {
            for &id in &active_entities {
                let row = entity_values.row_mut(id);
                let norm = l2_norm(row);
                if norm > T::from_f64_lossy(1e-12) {
                    for slot in row.iter_mut() {
                        *slot = *slot / norm;
                    }
                }
            }
        }

        if let Some(state) = clusters.as_deref_mut() {
            state.momentum_update(&entity_values, eta, options.freeze_inherited_centroids);
            if (epoch + 1) % hp.reassign_every == 0 {
                state.reassign(&entity_values)?;
            }
        }

        let total = epoch_kge + epoch_bayes + epoch_fcc;
        epochs.push(EpochRecord {
            snapshot,
            epoch,
            loss_kge: epoch_kge,
            loss_bayes: epoch_bayes,
            loss_fcc: epoch_fcc,
            loss_total: total,
            wall_secs: started.elapsed().as_secs_f64(),
        });
    }

    Ok(TrainedSnapshot {
        entity_values,
        relation_values,
        active_entities,
        active_relations,
        epochs,
    })
}

/// Sorted, deduplicated entity and relation ids occurring in `triples`.
fn active_ids(triples: &[Triple]) -> (Vec<u32>, Vec<u32>) {
    let mut entities = BTreeSet::new();
    let mut relations = BTreeSet::new();
    for triple in triples {
        entities.insert(triple.head);
        entities.insert(triple.tail);
        relations.insert(triple.relation);
    }
    (
        entities.into_iter().collect(),
        relations.into_iter().collect(),
    )
}
