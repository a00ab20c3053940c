//! Local (per-worker) training: E epochs of seeded mini-batch steps.

use rand::Rng;

use super::{backward, ModelParams, NnError, OptimizerKind, OptimizerState};
use crate::data::Dataset;
use crate::rng::{rng_from, tag};

pub struct LocalTrainOutcome {
    pub model: ModelParams,
    /// Per-layer flattened `M_in - M*`.
    pub pseudo_gradient: Vec<Vec<f64>>,
    pub mean_loss: f64,
}

/// Trains a copy of `model` on `shard` for `epochs` epochs of `batch_size`
/// mini-batches (shard order reshuffled each epoch from `shuffle_seed`), and
/// returns the trained model with the per-layer pseudo-gradient.
#[allow(clippy::too_many_arguments)]
pub fn local_train(
    model: &ModelParams,
    dataset: &Dataset,
    shard: &[u32],
    epochs: usize,
    batch_size: usize,
    optimizer: OptimizerKind,
    weight_decay: f64,
    lr: f64,
    shuffle_seed: u64,
) -> Result<LocalTrainOutcome, NnError> {
    if shard.is_empty() {
        return Err(NnError::EmptyShard);
    }
    if batch_size == 0 {
        return Err(NnError::ShapeMismatch("batch_size must be >= 1"));
    }
    let mut local = model.clone();
    let mut opt = OptimizerState::new(optimizer, weight_decay, &local);
    let mut order: Vec<u32> = shard.to_vec();
    let mut loss_sum = 0.0;
    let mut steps = 0usize;
    for epoch in 0..epochs {
        let mut rng = rng_from(&[shuffle_seed, tag::SHUFFLE, epoch as u64]);
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for batch in order.chunks(batch_size) {
            let (grads, loss) = backward(&local, dataset, batch)?;
            opt.step(&mut local, &grads, lr);
            loss_sum += loss;
            steps += 1;
        }
    }
    let pseudo_gradient = model.pseudo_gradient(&local);
    Ok(LocalTrainOutcome {
        model: local,
        pseudo_gradient,
        mean_loss: loss_sum / steps.max(1) as f64,
    })
}
