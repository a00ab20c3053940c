//! Centralized gradient-ablation experiment: rank gradient entries by
//! magnitude each step and zero or perturb the chosen fraction before the
//! optimizer sees them.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::nn::{backward, evaluate, LayerGrads, ModelParams, OptimizerState};
use crate::rng::{rng_from, tag};

use super::config::FedConfig;
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationMode {
    ZeroTop,
    ZeroRear,
    NoiseTop,
    NoiseRear,
}

impl AblationMode {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "zero_top" => Self::ZeroTop,
            "zero_rear" => Self::ZeroRear,
            "noise_top" => Self::NoiseTop,
            "noise_rear" => Self::NoiseRear,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AblationPoint {
    pub epoch: usize,
    pub accuracy: f64,
    pub loss: f64,
}

/// Single-worker training on the full training set for `cfg.rounds` epochs,
/// manipulating the chosen fraction of gradient entries (ranked by absolute
/// value across all layers) before each optimizer step.
pub fn gradient_ablation(
    cfg: &FedConfig,
    mode: AblationMode,
    fraction: f64,
    sigma: f64,
) -> Result<Vec<AblationPoint>, SimError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(SimError::Config("fraction must be in [0, 1]".into()));
    }
    let (train, test) = cfg.load_datasets()?;
    let classes = train.classes().max(test.classes());
    let mut model = ModelParams::new_mlp(train.dim(), &cfg.hidden, classes, cfg.seed);
    let mut opt = OptimizerState::new(cfg.optimizer_kind(), cfg.weight_decay, &model);
    let test_indices: Vec<u32> = (0..test.len() as u32).collect();
    let mut order: Vec<u32> = (0..train.len() as u32).collect();

    let mut trace = Vec::with_capacity(cfg.rounds);
    for epoch in 0..cfg.rounds {
        let mut rng = rng_from(&[cfg.seed, tag::SHUFFLE, epoch as u64]);
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for (step, batch) in order.chunks(cfg.batch_size).enumerate() {
            let (mut grads, _) = backward(&model, &train, batch)?;
            ablate(&mut grads, mode, fraction, sigma, &[cfg.seed, tag::ABLATION, epoch as u64, step as u64]);
            opt.step(&mut model, &grads, cfg.client_lr);
        }
        let (accuracy, loss) = evaluate(&model, &test, &test_indices)?;
        trace.push(AblationPoint { epoch, accuracy, loss });
    }
    Ok(trace)
}

fn ablate(grads: &mut [LayerGrads], mode: AblationMode, fraction: f64, sigma: f64, seed: &[u64]) {
    let total: usize = grads.iter().map(|g| g.w.len() + g.b.len()).sum();
    let count = (fraction * total as f64).round() as usize;
    if count == 0 {
        return;
    }
    // Rank all entries by |value|; ties break by position for determinism.
    let mut idx: Vec<u32> = (0..total as u32).collect();
    let flat_abs: Vec<f64> = grads
        .iter()
        .flat_map(|g| g.w.iter().chain(&g.b))
        .map(|v| v.abs())
        .collect();
    idx.sort_unstable_by(|&a, &b| {
        flat_abs[b as usize]
            .partial_cmp(&flat_abs[a as usize])
            .unwrap()
            .then(a.cmp(&b))
    });
    let chosen: &[u32] = match mode {
        AblationMode::ZeroTop | AblationMode::NoiseTop => &idx[..count],
        AblationMode::ZeroRear | AblationMode::NoiseRear => &idx[total - count..],
    };

    let mut rng = rng_from(seed);
    let mut targets: Vec<u32> = chosen.to_vec();
    targets.sort_unstable(); // apply in position order so rng use is stable
    let mut target_iter = targets.iter().peekable();
    let mut pos = 0u32;
    for g in grads.iter_mut() {
        for v in g.w.iter_mut().chain(g.b.iter_mut()) {
            if target_iter.peek() == Some(&&pos) {
                target_iter.next();
                match mode {
                    AblationMode::ZeroTop | AblationMode::ZeroRear => *v = 0.0,
                    AblationMode::NoiseTop | AblationMode::NoiseRear => {
                        let z: f64 = rng.sample(StandardNormal);
                        *v += sigma * z;
                    }
                }
            }
            pos += 1;
        }
    }
}
