//! Uniform (linear) quantization baseline.

use rand::Rng;

use crate::codec::{CodecError, GradientVector, QuantizedGradient, Scheme};
use crate::rng::rng_from;

/// Affine s-bit quantization of values on `[-b_g, b_g]`.
///
/// `v = (g + b_g) / (2 b_g) * 2^s`; biased takes `round(v)`, unbiased applies
/// the same stochastic rounding as the cosine scheme to `v`. Codes clamp to
/// `[0, 2^s - 1]` and decode at the left grid point `code * 2 b_g / 2^s - b_g`.
/// The only transmitted side information is the scale `b_g`, carried in the
/// `norm` field: `max |g_i|`, or the clip quantile when `clip_fraction > 0`.
pub fn quantize_linear(
    g: &GradientVector,
    bits: u8,
    unbiased: bool,
    clip_fraction: f64,
    rng_seed: u64,
) -> Result<QuantizedGradient, CodecError> {
    if bits == 0 || bits > 8 {
        return Err(CodecError::InvalidParam("bits must be in 1..=8"));
    }
    if !(0.0..0.5).contains(&clip_fraction) {
        return Err(CodecError::InvalidParam("clip_fraction must be in [0, 0.5)"));
    }
    if g.norm() == 0.0 {
        return Err(CodecError::ZeroNorm);
    }
    let n = g.len();
    let b_g = if clip_fraction > 0.0 {
        let mut mags: Vec<f64> = g.values().iter().map(|v| v.abs()).collect();
        mags.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let rank = (((1.0 - clip_fraction) * n as f64).ceil() as usize).clamp(1, n);
        mags[rank - 1]
    } else {
        g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    if b_g == 0.0 {
        // Degenerate scale (e.g. clipping across a majority of zeros): every
        // value decodes to 0, transmitted as a zero packet.
        return Ok(QuantizedGradient::zero(
            if unbiased { Scheme::LinearUnbiased } else { Scheme::LinearBiased },
            bits,
            n,
        ));
    }

    let levels = (1u32 << bits) as f64;
    let max_code = (1u32 << bits) - 1;
    let mut rng = rng_from(&[rng_seed]);
    let codes: Vec<u8> = g
        .values()
        .iter()
        .map(|&x| {
            let v = ((x + b_g) / (2.0 * b_g) * levels).clamp(0.0, levels);
            let c = if unbiased {
                let floor = v.floor();
                let p = v - floor;
                floor as u32 + u32::from(p > 0.0 && rng.gen::<f64>() < p)
            } else {
                v.round() as u32
            };
            c.min(max_code) as u8
        })
        .collect();

    Ok(QuantizedGradient {
        codes,
        bits,
        bound: crate::codec::AngleBound { b_theta: 0.0, clip_fraction },
        norm: b_g,
        scheme: if unbiased { Scheme::LinearUnbiased } else { Scheme::LinearBiased },
        full_len: n,
        mask: None,
        hadamard_seed: None,
    })
}
