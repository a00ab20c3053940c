//! Random-mask sparsification: transmit a seeded random subset of
//! coordinates; the receiver regenerates the index set from the seed.

use rand::Rng;

use crate::codec::CodecError;
use crate::rng::{rng_from, tag};

/// A regenerable random index set. `indices` is always sorted and is never
/// serialized; `(seed, len, kept_fraction)` reproduce it bit-identically.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsificationMask {
    pub kept_fraction: f64,
    pub seed: u64,
    indices: Vec<u32>,
    full_len: usize,
}

impl SparsificationMask {
    /// Draws `round(kept_fraction * n)` distinct indices by a seeded
    /// Fisher-Yates prefix, then sorts them.
    pub fn generate(seed: u64, full_len: usize, kept_fraction: f64) -> Result<Self, CodecError> {
        if !(kept_fraction > 0.0 && kept_fraction <= 1.0) {
            return Err(CodecError::InvalidParam("kept_fraction must be in (0, 1]"));
        }
        let m = ((kept_fraction * full_len as f64).round() as usize).min(full_len);
        let mut pool: Vec<u32> = (0..full_len as u32).collect();
        let mut rng = rng_from(&[seed, tag::MASK]);
        for i in 0..m {
            let j = rng.gen_range(i..full_len);
            pool.swap(i, j);
        }
        let mut indices = pool[..m].to_vec();
        indices.sort_unstable();
        Ok(Self { kept_fraction, seed, indices, full_len })
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn kept_len(&self) -> usize {
        self.indices.len()
    }

    pub fn full_len(&self) -> usize {
        self.full_len
    }
}

/// Gathers the kept coordinates into a compact vector. No rescaling is
/// applied to the kept entries.
pub fn apply_mask(values: &[f64], mask: &SparsificationMask) -> Result<Vec<f64>, CodecError> {
    if values.len() != mask.full_len {
        return Err(CodecError::DimMismatch { expected: mask.full_len, got: values.len() });
    }
    Ok(mask.indices.iter().map(|&i| values[i as usize]).collect())
}

/// Scatters a compact vector back to full length, zero elsewhere.
pub fn expand_mask(
    compacted: &[f64],
    mask: &SparsificationMask,
    full_len: usize,
) -> Result<Vec<f64>, CodecError> {
    if compacted.len() != mask.kept_len() || full_len != mask.full_len {
        return Err(CodecError::DimMismatch { expected: mask.kept_len(), got: compacted.len() });
    }
    let mut out = vec![0.0; full_len];
    for (&i, &v) in mask.indices.iter().zip(compacted) {
        out[i as usize] = v;
    }
    Ok(out)
}
