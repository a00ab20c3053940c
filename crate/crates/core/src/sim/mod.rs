//! Deterministic FedAvg orchestration with pluggable compression pipelines.

mod ablation;
mod config;
mod pipeline;
mod round;

pub use ablation::{gradient_ablation, AblationMode, AblationPoint};
pub use config::{
    CompressionScheme, DatasetKind, FedConfig, OptimizerName, PartitionName, ScheduleKind,
};
pub use pipeline::CompressionPipeline;
pub use round::{aggregate_updates, aggregate_updates_per_coord, RoundReport, Simulation};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Codec(#[from] crate::codec::CodecError),
    #[error(transparent)]
    Pack(#[from] crate::packing::PackError),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error(transparent)]
    Nn(#[from] crate::nn::NnError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
