//! Comparison compressors: linear quantization, random Hadamard rotation,
//! sign-based 1-bit schemes with error feedback, and random-mask
//! sparsification. All of them produce the same `QuantizedGradient` /
//! dequantize surface as the cosine codec so the simulator can swap schemes
//! freely.

mod hadamard;
mod linear;
mod mask;
mod sign;

pub use hadamard::{hadamard_inverse, hadamard_rotate, HadamardContext};
pub use linear::quantize_linear;
pub use mask::{apply_mask, expand_mask, SparsificationMask};
pub use sign::{ef_sign_step, sign_sgd, sign_sgd_norm, ErrorFeedbackState};
