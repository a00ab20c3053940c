//! Random Hadamard rotation preconditioning for linear quantization.

use rand::Rng;

use crate::codec::{CodecError, GradientVector};
use crate::rng::{rng_from, tag};

/// Rotation parameters: zero-padding target and the seed of the random
/// +/-1 diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HadamardContext {
    pub padded_dim: usize,
    pub sign_seed: u64,
}

impl HadamardContext {
    /// Smallest power of two >= n.
    pub fn for_len(n: usize, sign_seed: u64) -> Self {
        Self { padded_dim: n.max(1).next_power_of_two(), sign_seed }
    }

    fn signs(&self) -> Vec<f64> {
        let mut rng = rng_from(&[self.sign_seed, tag::HADAMARD]);
        (0..self.padded_dim)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect()
    }
}

/// In-place unnormalized fast Walsh-Hadamard transform; len must be a power
/// of two. O(n log n) butterfly recursion.
fn fwht(data: &mut [f64]) {
    debug_assert!(data.len().is_power_of_two());
    let mut h = 1;
    while h < data.len() {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let x = *a;
                let y = *b;
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Pads with zeros to `padded_dim` and applies `D H / sqrt(d)`: Hadamard
/// butterfly first, then the random sign diagonal. An isometry.
pub fn hadamard_rotate(g: &GradientVector, ctx: &HadamardContext) -> Result<GradientVector, CodecError> {
    if g.len() > ctx.padded_dim {
        return Err(CodecError::DimMismatch { expected: ctx.padded_dim, got: g.len() });
    }
    let mut data = vec![0.0; ctx.padded_dim];
    data[..g.len()].copy_from_slice(g.values());
    fwht(&mut data);
    let scale = 1.0 / (ctx.padded_dim as f64).sqrt();
    for (v, s) in data.iter_mut().zip(ctx.signs()) {
        *v *= s * scale;
    }
    GradientVector::new(data)
}

/// Inverse of [`hadamard_rotate`]: `H D / sqrt(d)`, then truncation back to
/// `original_len` entries.
pub fn hadamard_inverse(
    rotated: &GradientVector,
    ctx: &HadamardContext,
    original_len: usize,
) -> Result<GradientVector, CodecError> {
    if rotated.len() != ctx.padded_dim {
        return Err(CodecError::DimMismatch { expected: ctx.padded_dim, got: rotated.len() });
    }
    if original_len > ctx.padded_dim {
        return Err(CodecError::DimMismatch { expected: ctx.padded_dim, got: original_len });
    }
    let scale = 1.0 / (ctx.padded_dim as f64).sqrt();
    let mut data: Vec<f64> = rotated
        .values()
        .iter()
        .zip(ctx.signs())
        .map(|(&v, s)| v * s * scale)
        .collect();
    fwht(&mut data);
    data.truncate(original_len);
    GradientVector::new(data)
}
