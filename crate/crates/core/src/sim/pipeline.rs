//! Per-layer compression pipeline: mask, optional rotation, quantization,
//! wire packet — and the server-side inverse.

use crate::baselines::{
    apply_mask, ef_sign_step, expand_mask, hadamard_inverse, hadamard_rotate, quantize_linear,
    sign_sgd, sign_sgd_norm, ErrorFeedbackState, HadamardContext, SparsificationMask,
};
use crate::codec::{
    dequantize, l2_norm, quantize_cosine, GradientVector, MaskDescriptor, QuantizedGradient,
    QuantizerConfig, Scheme,
};
use crate::packing::{decode_packet, encode_packet};
use crate::rng::derive_seed;

use super::config::{CompressionScheme, FedConfig};
use super::SimError;

/// Stateless description of the client->server compression path. Seeds are
/// derived per (round, client, layer), so the server can regenerate masks
/// and rotations from the packet header alone.
#[derive(Debug, Clone)]
pub struct CompressionPipeline {
    pub scheme: CompressionScheme,
    pub bits: u8,
    pub unbiased: bool,
    pub clip_fraction: f64,
    pub kept_fraction: f64,
    pub hadamard: bool,
    pub bound_formula: crate::codec::BoundFormula,
    pub mask_base_seed: u64,
    pub quantizer_base_seed: u64,
}

impl CompressionPipeline {
    pub fn from_config(cfg: &FedConfig) -> Self {
        Self {
            scheme: cfg.scheme,
            bits: cfg.bits,
            unbiased: cfg.unbiased,
            clip_fraction: cfg.clip_fraction,
            kept_fraction: cfg.kept_fraction,
            hadamard: cfg.hadamard,
            bound_formula: cfg.bound_formula_value(),
            mask_base_seed: cfg.mask_seed,
            quantizer_base_seed: cfg.quantizer_seed,
        }
    }

    fn pipeline_seed(&self, round: usize, client: usize, layer: usize) -> u64 {
        derive_seed(&[self.mask_base_seed, round as u64, client as u64, layer as u64])
    }

    fn quantizer_seed(&self, round: usize, client: usize, layer: usize) -> u64 {
        derive_seed(&[self.quantizer_base_seed, round as u64, client as u64, layer as u64])
    }

    /// Compresses one layer's flat pseudo-gradient into packet bytes.
    /// `ef` must be provided (and is mutated) for the error-feedback scheme.
    pub fn encode_layer(
        &self,
        values: &[f64],
        round: usize,
        client: usize,
        layer: usize,
        ef: Option<&mut ErrorFeedbackState>,
    ) -> Result<Vec<u8>, SimError> {
        self.encode_with_seeds(
            values,
            self.pipeline_seed(round, client, layer),
            self.quantizer_seed(round, client, layer),
            ef,
        )
    }

    /// Same as [`encode_layer`](Self::encode_layer) with the mask/rotation
    /// seed and the stochastic-rounding seed given directly.
    pub fn encode_with_seeds(
        &self,
        values: &[f64],
        seed: u64,
        quantizer_seed: u64,
        ef: Option<&mut ErrorFeedbackState>,
    ) -> Result<Vec<u8>, SimError> {
        debug_assert!(!matches!(self.scheme, CompressionScheme::Float32));
        let n = values.len();

        // An exactly-zero gradient short-circuits to the norm-0 marker
        // (except for error feedback, whose residual may still be nonzero).
        if !matches!(self.scheme, CompressionScheme::EfSign) && l2_norm(values) == 0.0 {
            let q = QuantizedGradient::zero(self.wire_scheme(), self.bits, n);
            return Ok(encode_packet(&q)?.to_bytes());
        }

        let (work, mask) = if self.kept_fraction < 1.0 {
            let mask = SparsificationMask::generate(seed, n, self.kept_fraction)?;
            (apply_mask(values, &mask)?, Some(mask))
        } else {
            (values.to_vec(), None)
        };

        // A masked subvector can be all zeros even when the layer is not.
        if !matches!(self.scheme, CompressionScheme::EfSign) && l2_norm(&work) == 0.0 {
            let q = QuantizedGradient::zero(self.wire_scheme(), self.bits, n);
            return Ok(encode_packet(&q)?.to_bytes());
        }

        let mut q = match self.scheme {
            CompressionScheme::Float32 => unreachable!("float32 is handled by the caller"),
            CompressionScheme::Cosine => {
                let cfg = QuantizerConfig {
                    bits: self.bits,
                    unbiased: self.unbiased,
                    clip_fraction: self.clip_fraction,
                    rng_seed: quantizer_seed,
                    bound_formula: self.bound_formula,
                };
                quantize_cosine(&GradientVector::new(work)?, &cfg)?
            }
            CompressionScheme::Linear => {
                let g = GradientVector::new(work)?;
                if self.hadamard {
                    let ctx = HadamardContext::for_len(g.len(), seed);
                    let rotated = hadamard_rotate(&g, &ctx)?;
                    let mut q = quantize_linear(
                        &rotated,
                        self.bits,
                        self.unbiased,
                        self.clip_fraction,
                        quantizer_seed,
                    )?;
                    q.hadamard_seed = Some(seed);
                    q
                } else {
                    quantize_linear(
                        &g,
                        self.bits,
                        self.unbiased,
                        self.clip_fraction,
                        quantizer_seed,
                    )?
                }
            }
            CompressionScheme::Sign => sign_sgd(&GradientVector::new(work)?),
            CompressionScheme::SignNorm => sign_sgd_norm(&GradientVector::new(work)?)?,
            CompressionScheme::EfSign => {
                let state = ef.ok_or_else(|| {
                    SimError::Config("error-feedback scheme needs per-client state".into())
                })?;
                ef_sign_step(&GradientVector::new(work)?, state)?
            }
        };
        // full_len is the layer length before masking and rotation padding.
        q.full_len = n;
        if let Some(m) = &mask {
            q.mask = Some(MaskDescriptor { seed, kept_fraction: m.kept_fraction });
        }
        Ok(encode_packet(&q)?.to_bytes())
    }

    /// Decodes packet bytes into a full-length update vector, returning the
    /// regenerated mask (if any) for per-coordinate aggregation.
    pub fn decode_layer(&self, bytes: &[u8]) -> Result<(Vec<f64>, Option<SparsificationMask>), SimError> {
        let (q, _consumed) = decode_packet(bytes)?;
        if q.is_zero_marker() {
            return Ok((vec![0.0; q.full_len], None));
        }
        let decoded = dequantize(&q)?;
        let mask = match &q.mask {
            Some(d) => Some(SparsificationMask::generate(d.seed, q.full_len, d.kept_fraction)?),
            None => None,
        };
        let kept_len = mask.as_ref().map_or(q.full_len, |m| m.kept_len());
        let values = if let Some(seed) = q.hadamard_seed {
            let ctx = HadamardContext::for_len(kept_len, seed);
            hadamard_inverse(&decoded, &ctx, kept_len)?.into_values()
        } else {
            decoded.into_values()
        };
        let full = match &mask {
            Some(m) => expand_mask(&values, m, q.full_len)?,
            None => values,
        };
        Ok((full, mask))
    }

    fn wire_scheme(&self) -> Scheme {
        match (self.scheme, self.unbiased) {
            (CompressionScheme::Cosine, false) => Scheme::CosineBiased,
            (CompressionScheme::Cosine, true) => Scheme::CosineUnbiased,
            (CompressionScheme::Linear, false) => Scheme::LinearBiased,
            (CompressionScheme::Linear, true) => Scheme::LinearUnbiased,
            (CompressionScheme::Sign, _) => Scheme::Sign,
            (CompressionScheme::SignNorm | CompressionScheme::EfSign, _) => Scheme::SignNorm,
            (CompressionScheme::Float32, _) => unreachable!(),
        }
    }
}
