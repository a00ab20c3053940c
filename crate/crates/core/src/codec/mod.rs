//! Cosine (angle-domain) gradient quantization.
//!
//! A gradient vector `g` is mapped per-coordinate to the angle
//! `theta_i = arccos(g_i / ||g||)` in `[0, pi]`, a bound `b < pi/2` is chosen
//! so that quantization spends its levels only on `[b, pi - b]` where angles
//! actually occur, and each angle is encoded into an s-bit code. Decoding is
//! `cos(code * (pi - 2b) / 2^s + b) * ||g||`. The partition is uniform in
//! angle and therefore nonlinear in gradient space: intervals near the bound
//! (large |g_i|) are finer than intervals near pi/2 (small |g_i|).

mod analysis;
mod angle;
mod quantize;

pub use analysis::{count_better_intervals, error_bound, interval_table, IntervalRow};
pub use angle::{compute_angles, compute_bound_auto, compute_bound_clipped, BoundFormula};
pub use quantize::{dequantize, quantize_1bit, quantize_biased, quantize_cosine, quantize_unbiased};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CodecError {
    #[error("gradient vector has zero norm")]
    ZeroNorm,
    #[error("gradient contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("quantization range is degenerate (pi - 2b < {0:e})")]
    DegenerateRange(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("empty input")]
    Empty,
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
}

/// Floor kept between the bound and pi/2 so the range never collapses.
pub const BOUND_EPS: f64 = 1e-6;

/// Range width below which quantization is refused.
pub const RANGE_EPS: f64 = 1e-9;

/// A flat per-layer gradient with its cached L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    values: Vec<f64>,
    norm: f64,
}

impl GradientVector {
    /// Builds the vector, rejecting NaN/Inf entries and caching the L2 norm.
    pub fn new(values: Vec<f64>) -> Result<Self, CodecError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CodecError::NonFinite(i));
        }
        let norm = l2_norm(&values);
        Ok(Self { values, norm })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

pub(crate) fn l2_norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Per-coordinate angles `arccos(g_i / ||g||)`, each in `[0, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleVector {
    angles: Vec<f64>,
}

impl AngleVector {
    pub(crate) fn from_raw(angles: Vec<f64>) -> Self {
        debug_assert!(angles
            .iter()
            .all(|&a| (0.0..=std::f64::consts::PI).contains(&a)));
        Self { angles }
    }

    /// Builds an angle vector from raw radians, all in `[0, pi]`.
    pub fn from_angles(angles: Vec<f64>) -> Result<Self, CodecError> {
        if let Some(i) = angles
            .iter()
            .position(|a| !a.is_finite() || !(0.0..=std::f64::consts::PI).contains(a))
        {
            return Err(CodecError::NonFinite(i));
        }
        Ok(Self { angles })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Lower edge of the quantization range `[b, pi - b]`.
///
/// `clip_fraction` records how the bound was obtained: 0 means the automatic
/// min/max formula, a positive value means that fraction of top-magnitude
/// entries was clipped to get a tighter range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleBound {
    pub b_theta: f64,
    pub clip_fraction: f64,
}

impl AngleBound {
    pub fn new(b_theta: f64, clip_fraction: f64) -> Result<Self, CodecError> {
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&b_theta) {
            return Err(CodecError::InvalidParam("b_theta must be in [0, pi/2)"));
        }
        if !(0.0..0.5).contains(&clip_fraction) {
            return Err(CodecError::InvalidParam("clip_fraction must be in [0, 0.5)"));
        }
        Ok(Self { b_theta, clip_fraction })
    }

    /// Width of one quantization interval for an s-bit code space.
    pub fn interval_width(&self, bits: u8) -> f64 {
        (std::f64::consts::PI - 2.0 * self.b_theta) / (1u64 << bits) as f64
    }
}

/// Which compressor produced a quantized gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    CosineBiased,
    CosineUnbiased,
    LinearBiased,
    LinearUnbiased,
    Sign,
    SignNorm,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::CosineBiased,
        Scheme::CosineUnbiased,
        Scheme::LinearBiased,
        Scheme::LinearUnbiased,
        Scheme::Sign,
        Scheme::SignNorm,
    ];
}

/// Sparsification descriptor carried alongside the codes; the index set is
/// regenerated from `(seed, full_len, kept_fraction)` and never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskDescriptor {
    pub seed: u64,
    pub kept_fraction: f64,
}

/// The decodable unit: s-bit codes plus the side information needed to
/// reconstruct gradient values.
///
/// Field semantics depend on `scheme`:
/// - cosine schemes: `bound` is the angle bound, `norm` is `||g||_2`;
/// - linear schemes: `norm` carries the affine scale `b_g` (the only side
///   information linear quantization transmits), `bound` is unused (0);
/// - `Sign`: codes decode to +/-1, side information unused;
/// - `SignNorm`: decodes to `+/- cos(bound/2 + pi/4) * norm`.
///
/// A zero `norm` with empty `codes` marks a zero gradient; it decodes to an
/// all-zero vector of `full_len` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedGradient {
    pub codes: Vec<u8>,
    pub bits: u8,
    pub bound: AngleBound,
    pub norm: f64,
    pub scheme: Scheme,
    /// Length of the original (pre-mask, pre-padding) vector.
    pub full_len: usize,
    pub mask: Option<MaskDescriptor>,
    /// Sign-diagonal seed when the codes live in a Hadamard-rotated space.
    pub hadamard_seed: Option<u64>,
}

impl QuantizedGradient {
    /// A zero-gradient marker: no codes, norm 0, decodes to all zeros.
    pub fn is_zero_marker(&self) -> bool {
        self.norm == 0.0 && self.codes.is_empty()
    }

    /// Number of codes the payload is expected to hold.
    pub fn expected_code_len(&self) -> usize {
        if self.is_zero_marker() {
            return 0;
        }
        let kept = match self.mask {
            Some(m) => (m.kept_fraction * self.full_len as f64).round() as usize,
            None => self.full_len,
        };
        match self.hadamard_seed {
            Some(_) => kept.max(1).next_power_of_two(),
            None => kept,
        }
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        if self.bits == 0 || self.bits > 8 {
            return Err(CodecError::InvalidParam("bits must be in 1..=8"));
        }
        let max = if self.bits == 8 { u8::MAX } else { (1u8 << self.bits) - 1 };
        if self.codes.iter().any(|&c| c > max) {
            return Err(CodecError::InvalidParam("code exceeds 2^bits - 1"));
        }
        if self.codes.len() != self.expected_code_len() {
            return Err(CodecError::DimMismatch {
                expected: self.expected_code_len(),
                got: self.codes.len(),
            });
        }
        Ok(())
    }

    /// Marker packet for an exactly-zero gradient (empty payload).
    pub fn zero(scheme: Scheme, bits: u8, full_len: usize) -> Self {
        Self {
            codes: Vec::new(),
            bits,
            bound: AngleBound { b_theta: 0.0, clip_fraction: 0.0 },
            norm: 0.0,
            scheme,
            full_len,
            mask: None,
            hadamard_seed: None,
        }
    }
}

/// Aggregates the knobs of the cosine quantizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerConfig {
    pub bits: u8,
    pub unbiased: bool,
    /// 0 = automatic bound; otherwise fraction of top-|g| entries clipped.
    pub clip_fraction: f64,
    /// Consumed only by the unbiased (stochastic-rounding) path.
    pub rng_seed: u64,
    pub bound_formula: BoundFormula,
}

impl QuantizerConfig {
    pub fn biased(bits: u8, clip_fraction: f64) -> Self {
        Self {
            bits,
            unbiased: false,
            clip_fraction,
            rng_seed: 0,
            bound_formula: BoundFormula::RangeSymmetric,
        }
    }

    pub fn unbiased(bits: u8, clip_fraction: f64, rng_seed: u64) -> Self {
        Self {
            bits,
            unbiased: true,
            clip_fraction,
            rng_seed,
            bound_formula: BoundFormula::RangeSymmetric,
        }
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        if self.bits == 0 || self.bits > 8 {
            return Err(CodecError::InvalidParam("bits must be in 1..=8"));
        }
        if !(0.0..0.5).contains(&self.clip_fraction) {
            return Err(CodecError::InvalidParam("clip_fraction must be in [0, 0.5)"));
        }
        Ok(())
    }
}
