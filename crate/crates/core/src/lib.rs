//! Gradient-compression codec and deterministic FedAvg simulator.
//!
//! The crate is organized around the path a gradient takes from a worker to
//! the server:
//!
//! - [`codec`]: the cosine (angle-domain) quantizer family — angle transform,
//!   bound computation, biased/unbiased s-bit quantization, dequantization,
//!   and the per-interval error analysis.
//! - [`baselines`]: comparison schemes — linear quantization, random Hadamard
//!   rotation, signSGD variants with error feedback, and random-mask
//!   sparsification.
//! - [`packing`]: bit-exact wire serialization, DEFLATE compression, byte
//!   entropy, and uplink cost accounting.
//! - [`nn`]: a small dense network with manual backprop, SGD/momentum/Adam,
//!   and cosine learning-rate schedules.
//! - [`data`]: IDX dataset loading, synthetic data, and IID/non-IID client
//!   partitioning.
//! - [`sim`]: the federated-averaging orchestration tying it all together.
//!
//! Every operation is deterministic given its inputs and explicit seeds.

pub mod baselines;
pub mod codec;
pub mod data;
pub mod nn;
pub mod packing;
pub mod rng;
pub mod sim;
