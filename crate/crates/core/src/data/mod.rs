//! Dataset loading and client partitioning.

mod idx;
mod partition;
mod synth;

pub use idx::load_idx;
pub use partition::{partition, Partition, PartitionMode};
pub use synth::{synth_blobs, synth_gradient, synth_images};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("bad magic number {got:#010x}, expected {expected:#010x}")]
    BadMagic { got: u32, expected: u32 },
    #[error("images/labels mismatch: {images} images vs {labels} labels")]
    DimMismatch { images: usize, labels: usize },
    #[error("file truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("cannot split {examples} examples across {clients} clients")]
    TooManyClients { clients: usize, examples: usize },
    #[error("invalid dataset: {0}")]
    Invalid(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An in-memory classification dataset: row-major features scaled to
/// `[0, 1]` and one integer label per row. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Vec<f32>,
    dim: usize,
    labels: Vec<u8>,
    classes: usize,
}

impl Dataset {
    pub fn new(features: Vec<f32>, dim: usize, labels: Vec<u8>) -> Result<Self, DataError> {
        if dim == 0 || !features.len().is_multiple_of(dim) {
            return Err(DataError::Invalid("feature matrix is not rectangular"));
        }
        let rows = features.len() / dim;
        if rows != labels.len() {
            return Err(DataError::DimMismatch { images: rows, labels: labels.len() });
        }
        let classes = labels.iter().copied().max().map_or(1, |m| m as usize + 1);
        Ok(Self { features, dim, labels, classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Splits into rows `[0, at)` and `[at, len)`. Class count carries over.
    pub fn split(mut self, at: usize) -> (Dataset, Dataset) {
        assert!(at <= self.len());
        let tail_features = self.features.split_off(at * self.dim);
        let tail_labels = self.labels.split_off(at);
        let tail = Dataset {
            features: tail_features,
            dim: self.dim,
            labels: tail_labels,
            classes: self.classes,
        };
        (self, tail)
    }
}
