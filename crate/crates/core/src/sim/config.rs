//! Run configuration: a flat key-value TOML file fully determines an
//! experiment.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::codec::BoundFormula;
use crate::data::{load_idx, partition, synth_blobs, synth_images, Dataset, Partition, PartitionMode};
use crate::nn::{LrSchedule, OptimizerKind};
use crate::rng::{derive_seed, tag};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompressionScheme {
    /// Identity transport charged at 4 bytes/parameter.
    Float32,
    Cosine,
    Linear,
    Sign,
    SignNorm,
    EfSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    Cosine,
    CosineRestarts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerName {
    Sgd,
    Momentum,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionName {
    Iid,
    NonIid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    SynthBlobs,
    SynthImages,
    Idx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFormulaName {
    Range,
    LiteralOne,
}

/// Everything a simulation run depends on. Unknown keys are rejected so a
/// typo cannot silently fall back to a default.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FedConfig {
    // federated setup
    pub rounds: usize,
    pub clients: usize,
    pub client_fraction: f64,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub server_lr: f64,
    pub client_lr: f64,
    pub lr_schedule: ScheduleKind,
    pub restarts: Vec<usize>,
    pub optimizer: OptimizerName,
    pub momentum: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub weight_decay: f64,

    // compression pipeline
    pub scheme: CompressionScheme,
    pub bits: u8,
    pub unbiased: bool,
    pub clip_fraction: f64,
    pub kept_fraction: f64,
    pub hadamard: bool,
    pub bound_formula: BoundFormulaName,
    /// Per-coordinate aggregation denominator for masked pipelines.
    pub per_coord_denominator: bool,

    // data and model
    pub dataset: DatasetKind,
    pub data_dir: String,
    pub synth_classes: usize,
    pub synth_dim: usize,
    pub synth_train: usize,
    pub synth_test: usize,
    pub synth_noise: f64,
    pub hidden: Vec<usize>,
    pub partition: PartitionName,

    // seeds; 0 means "derive from `seed`"
    pub seed: u64,
    pub sampling_seed: u64,
    pub mask_seed: u64,
    pub quantizer_seed: u64,
}

impl Default for FedConfig {
    fn default() -> Self {
        Self {
            rounds: 50,
            clients: 100,
            client_fraction: 0.1,
            local_epochs: 1,
            batch_size: 10,
            server_lr: 1.0,
            client_lr: 0.1,
            lr_schedule: ScheduleKind::Constant,
            restarts: Vec::new(),
            optimizer: OptimizerName::Sgd,
            momentum: 0.9,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            weight_decay: 1e-4,
            scheme: CompressionScheme::Float32,
            bits: 8,
            unbiased: false,
            clip_fraction: 0.0,
            kept_fraction: 1.0,
            hadamard: false,
            bound_formula: BoundFormulaName::Range,
            per_coord_denominator: false,
            dataset: DatasetKind::SynthBlobs,
            data_dir: String::new(),
            synth_classes: 10,
            synth_dim: 64,
            synth_train: 2000,
            synth_test: 500,
            synth_noise: 0.08,
            hidden: vec![128],
            partition: PartitionName::Iid,
            seed: 42,
            sampling_seed: 0,
            mask_seed: 0,
            quantizer_seed: 0,
        }
    }
}

impl FedConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, SimError> {
        let mut cfg: FedConfig = toml::from_str(s).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.normalize();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Fills derived seeds and snaps `kept_fraction` to f32 so client and
    /// server compute identical mask cardinalities from the wire header.
    pub fn normalize(&mut self) {
        if self.sampling_seed == 0 {
            self.sampling_seed = derive_seed(&[self.seed, tag::SAMPLING]);
        }
        if self.mask_seed == 0 {
            self.mask_seed = derive_seed(&[self.seed, tag::MASK]);
        }
        if self.quantizer_seed == 0 {
            self.quantizer_seed = derive_seed(&[self.seed, tag::QUANTIZER]);
        }
        self.kept_fraction = self.kept_fraction as f32 as f64;
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let err = |msg: &str| Err(SimError::Config(msg.into()));
        if self.clients == 0 {
            return err("clients must be >= 1");
        }
        if !(self.client_fraction > 0.0 && self.client_fraction <= 1.0) {
            return err("client_fraction must be in (0, 1]");
        }
        if self.local_epochs == 0 || self.batch_size == 0 {
            return err("local_epochs and batch_size must be >= 1");
        }
        if self.bits == 0 || self.bits > 8 {
            return err("bits must be in 1..=8");
        }
        if !(0.0..0.5).contains(&self.clip_fraction) {
            return err("clip_fraction must be in [0, 0.5)");
        }
        if !(self.kept_fraction > 0.0 && self.kept_fraction <= 1.0) {
            return err("kept_fraction must be in (0, 1]");
        }
        if self.hadamard && !matches!(self.scheme, CompressionScheme::Linear) {
            return err("hadamard rotation composes with the linear scheme only");
        }
        if !matches!(self.dataset, DatasetKind::Idx) && (self.synth_train == 0 || self.synth_test == 0) {
            return err("synthetic datasets need synth_train and synth_test >= 1");
        }
        Ok(())
    }

    pub fn selected_per_round(&self) -> usize {
        ((self.clients as f64 * self.client_fraction).ceil() as usize).clamp(1, self.clients)
    }

    pub fn optimizer_kind(&self) -> OptimizerKind {
        match self.optimizer {
            OptimizerName::Sgd => OptimizerKind::Sgd,
            OptimizerName::Momentum => OptimizerKind::Momentum { beta: self.momentum },
            OptimizerName::Adam => OptimizerKind::Adam {
                beta1: self.adam_beta1,
                beta2: self.adam_beta2,
                eps: self.adam_eps,
            },
        }
    }

    pub fn lr_schedule(&self) -> LrSchedule {
        match self.lr_schedule {
            ScheduleKind::Constant => LrSchedule::Constant(self.client_lr),
            ScheduleKind::Cosine => LrSchedule::CosineToZero { eta0: self.client_lr, total: self.rounds },
            ScheduleKind::CosineRestarts => LrSchedule::CosineWarmRestarts {
                eta0: self.client_lr,
                restarts: self.restarts.clone(),
                total: self.rounds,
            },
        }
    }

    pub fn bound_formula_value(&self) -> BoundFormula {
        match self.bound_formula {
            BoundFormulaName::Range => BoundFormula::RangeSymmetric,
            BoundFormulaName::LiteralOne => BoundFormula::LiteralOne,
        }
    }

    pub fn partition_mode(&self) -> PartitionMode {
        match self.partition {
            PartitionName::Iid => PartitionMode::Iid,
            PartitionName::NonIid => PartitionMode::NonIid,
        }
    }

    /// Loads (train, test) according to `dataset`.
    pub fn load_datasets(&self) -> Result<(Dataset, Dataset), SimError> {
        match self.dataset {
            DatasetKind::SynthBlobs => {
                // One draw, then split: train and test share class centers
                // but not noise.
                let all = synth_blobs(
                    self.synth_classes,
                    self.synth_train + self.synth_test,
                    self.synth_dim,
                    self.synth_noise,
                    derive_seed(&[self.seed, tag::DATA, 100]),
                );
                Ok(all.split(self.synth_train))
            }
            DatasetKind::SynthImages => {
                let all = synth_images(
                    self.synth_train + self.synth_test,
                    self.synth_noise,
                    derive_seed(&[self.seed, tag::DATA, 200]),
                );
                Ok(all.split(self.synth_train))
            }
            DatasetKind::Idx => {
                let dir = PathBuf::from(&self.data_dir);
                let train = load_idx(
                    &first_existing(&dir, &["train-images-idx3-ubyte", "train-images-idx3-ubyte.gz"])?,
                    &first_existing(&dir, &["train-labels-idx1-ubyte", "train-labels-idx1-ubyte.gz"])?,
                )?;
                let test = load_idx(
                    &first_existing(&dir, &["t10k-images-idx3-ubyte", "t10k-images-idx3-ubyte.gz"])?,
                    &first_existing(&dir, &["t10k-labels-idx1-ubyte", "t10k-labels-idx1-ubyte.gz"])?,
                )?;
                Ok((train, test))
            }
        }
    }

    pub fn build_partition(&self, train: &Dataset) -> Result<Partition, SimError> {
        Ok(partition(train, self.clients, self.partition_mode(), derive_seed(&[self.seed, tag::DATA, 300]))?)
    }
}

fn first_existing(dir: &Path, names: &[&str]) -> Result<PathBuf, SimError> {
    for name in names {
        let p = dir.join(name);
        if p.exists() {
            return Ok(p);
        }
    }
    Err(SimError::Config(format!(
        "none of {names:?} found under {}",
        dir.display()
    )))
}
