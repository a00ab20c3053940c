//! Dense-network training core: manual backprop, local optimizers, and
//! learning-rate schedules. Everything is f64 internally; checkpoints are
//! f32 on disk.

mod checkpoint;
mod mlp;
mod optim;
mod schedule;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use mlp::{backward, evaluate, forward, LayerGrads};
pub use optim::{OptimizerKind, OptimizerState};
pub use schedule::LrSchedule;
pub use train::{local_train, LocalTrainOutcome};

use thiserror::Error;

use crate::rng::{rng_from, tag};
use rand::Rng;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    #[error("empty shard")]
    EmptyShard,
    #[error("checkpoint manifest invalid: {0}")]
    BadManifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One dense layer, row-major `out_dim x in_dim` weights plus bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Layer {
    pub fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }

    /// Weights then bias, flattened: the unit of layer-wise compression.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend_from_slice(&self.w);
        out.extend_from_slice(&self.b);
        out
    }

    pub fn sub_flat_into(&self, newer: &Layer, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.w.iter().zip(&newer.w).map(|(a, b)| a - b));
        out.extend(self.b.iter().zip(&newer.b).map(|(a, b)| a - b));
    }

    /// `params -= scale * flat_update`.
    pub fn apply_flat_update(&mut self, update: &[f64], scale: f64) {
        debug_assert_eq!(update.len(), self.param_count());
        let (wu, bu) = update.split_at(self.w.len());
        for (p, u) in self.w.iter_mut().zip(wu) {
            *p -= scale * u;
        }
        for (p, u) in self.b.iter_mut().zip(bu) {
            *p -= scale * u;
        }
    }
}

/// An ordered list of named layers shared by server and simulated workers.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    layers: Vec<Layer>,
}

impl ModelParams {
    /// ReLU MLP with seeded He-uniform weights (`U(+/- sqrt(6/fan_in))`) and
    /// zero biases.
    pub fn new_mlp(input_dim: usize, hidden: &[usize], classes: usize, seed: u64) -> Self {
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(classes);
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, d)| {
                let (fan_in, fan_out) = (d[0], d[1]);
                let limit = (6.0 / fan_in as f64).sqrt();
                let mut rng = rng_from(&[seed, tag::INIT, i as u64]);
                Layer {
                    name: format!("dense{i}"),
                    in_dim: fan_in,
                    out_dim: fan_out,
                    w: (0..fan_in * fan_out).map(|_| rng.gen_range(-limit..limit)).collect(),
                    b: vec![0.0; fan_out],
                }
            })
            .collect();
        Self { layers }
    }

    pub fn from_layers(layers: Vec<Layer>) -> Self {
        Self { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.in_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim)
    }

    /// Per-layer `self - newer`, flattened; the FedAvg pseudo-gradient.
    pub fn pseudo_gradient(&self, newer: &ModelParams) -> Vec<Vec<f64>> {
        self.layers
            .iter()
            .zip(&newer.layers)
            .map(|(a, b)| {
                let mut out = Vec::new();
                a.sub_flat_into(b, &mut out);
                out
            })
            .collect()
    }

    /// `params -= scale * update` for each layer's flat update.
    pub fn apply_flat_updates(&mut self, updates: &[Vec<f64>], scale: f64) {
        debug_assert_eq!(updates.len(), self.layers.len());
        for (layer, u) in self.layers.iter_mut().zip(updates) {
            layer.apply_flat_update(u, scale);
        }
    }
}
