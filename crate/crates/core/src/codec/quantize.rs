//! Biased and unbiased s-bit quantization of angle vectors, the 1-bit
//! degeneration, and dequantization for every scheme.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;

use super::{
    compute_angles, compute_bound_auto, compute_bound_clipped, AngleBound, AngleVector,
    CodecError, GradientVector, QuantizedGradient, QuantizerConfig, Scheme,
    RANGE_EPS,
};
use crate::rng::rng_from;

fn check_range(bound: &AngleBound) -> Result<f64, CodecError> {
    let range = PI - 2.0 * bound.b_theta;
    if range < RANGE_EPS {
        return Err(CodecError::DegenerateRange(RANGE_EPS));
    }
    Ok(range)
}

/// Round-to-nearest grid code: `round((theta - b)/(pi - 2b) * 2^s)`, clamped
/// to `[0, 2^s - 1]`. The clamp folds the top edge `theta = pi - b` (and the
/// top half-interval) onto the last code.
pub fn quantize_biased(
    theta: &AngleVector,
    bound: &AngleBound,
    bits: u8,
) -> Result<Vec<u8>, CodecError> {
    if bits == 0 || bits > 8 {
        return Err(CodecError::InvalidParam("bits must be in 1..=8"));
    }
    let range = check_range(bound)?;
    let levels = (1u32 << bits) as f64;
    let max_code = (1u32 << bits) - 1;
    let codes = theta
        .angles()
        .iter()
        .map(|&a| {
            let v = (a - bound.b_theta) / range * levels;
            (v.round().max(0.0) as u32).min(max_code) as u8
        })
        .collect();
    Ok(codes)
}

/// Stochastic-rounding code: `floor(v)` with probability `1 - p`, else
/// `floor(v) + 1`, where `p` is the fractional part of `v`. Codes hitting
/// `2^s` (only possible at the very top edge) are clamped to `2^s - 1`.
///
/// The dequantized angle is unbiased: `E[code * q + b] = theta` away from
/// the clamped edge.
pub fn quantize_unbiased(
    theta: &AngleVector,
    bound: &AngleBound,
    bits: u8,
    rng_seed: u64,
) -> Result<Vec<u8>, CodecError> {
    if bits == 0 || bits > 8 {
        return Err(CodecError::InvalidParam("bits must be in 1..=8"));
    }
    let range = check_range(bound)?;
    let levels = (1u32 << bits) as f64;
    let max_code = (1u32 << bits) - 1;
    let mut rng = rng_from(&[rng_seed]);
    let codes = theta
        .angles()
        .iter()
        .map(|&a| {
            let v = ((a - bound.b_theta) / range * levels).max(0.0);
            let floor = v.floor();
            let p = v - floor;
            let up = p > 0.0 && rng.gen::<f64>() < p;
            ((floor as u32 + up as u32).min(max_code)) as u8
        })
        .collect();
    Ok(codes)
}

/// Amplitude of the 1-bit reconstruction: the cosine of the center of the
/// positive half-range, `cos(b + (pi - 2b)/4) = cos(b/2 + pi/4)`.
pub(crate) fn sign_norm_amplitude(b_theta: f64) -> f64 {
    (0.5 * b_theta + FRAC_PI_4).cos()
}

/// 1-bit degeneration: one sign bit per entry, reconstructed at the centers
/// of the two half-ranges. Ties at `theta = pi/2` (a zero entry) take the
/// positive side, matching `sign(0) = +1`.
pub fn quantize_1bit(g: &GradientVector, bound: &AngleBound) -> Result<QuantizedGradient, CodecError> {
    if g.norm() == 0.0 {
        return Err(CodecError::ZeroNorm);
    }
    check_range(bound)?;
    let theta = compute_angles(g)?;
    let codes = theta
        .angles()
        .iter()
        .map(|&a| u8::from(a <= FRAC_PI_2))
        .collect();
    Ok(QuantizedGradient {
        codes,
        bits: 1,
        bound: *bound,
        norm: g.norm(),
        scheme: Scheme::SignNorm,
        full_len: g.len(),
        mask: None,
        hadamard_seed: None,
    })
}

/// Full cosine pipeline for one vector: angle transform, bound policy, and
/// code generation under `cfg`. `bits = 1` routes to the sign degeneration.
pub fn quantize_cosine(g: &GradientVector, cfg: &QuantizerConfig) -> Result<QuantizedGradient, CodecError> {
    cfg.validate()?;
    if g.norm() == 0.0 {
        return Err(CodecError::ZeroNorm);
    }
    let (bound, theta) = if cfg.clip_fraction > 0.0 {
        compute_bound_clipped(g, cfg.clip_fraction)?
    } else {
        let theta = compute_angles(g)?;
        let bound = compute_bound_auto(&theta, cfg.bound_formula)?;
        (bound, theta)
    };
    if cfg.bits == 1 {
        return quantize_1bit(g, &bound);
    }
    let codes = if cfg.unbiased {
        quantize_unbiased(&theta, &bound, cfg.bits, cfg.rng_seed)?
    } else {
        quantize_biased(&theta, &bound, cfg.bits)?
    };
    Ok(QuantizedGradient {
        codes,
        bits: cfg.bits,
        bound,
        norm: g.norm(),
        scheme: if cfg.unbiased { Scheme::CosineUnbiased } else { Scheme::CosineBiased },
        full_len: g.len(),
        mask: None,
        hadamard_seed: None,
    })
}

/// Reconstructs gradient values from codes.
///
/// Cosine schemes decode at the left grid point `cos(code * q + b) * norm`;
/// linear schemes decode at `code * 2 b_g / 2^s - b_g` with `b_g` carried in
/// the `norm` field; `Sign` decodes to +/-1 and `SignNorm` to the signed
/// half-range-center amplitude. The returned vector recomputes its own norm.
pub fn dequantize(q: &QuantizedGradient) -> Result<GradientVector, CodecError> {
    q.validate()?;
    if q.is_zero_marker() {
        return GradientVector::new(vec![0.0; q.full_len]);
    }
    let levels = (1u32 << q.bits) as f64;
    let values: Vec<f64> = match q.scheme {
        Scheme::CosineBiased | Scheme::CosineUnbiased => {
            let qw = (PI - 2.0 * q.bound.b_theta) / levels;
            q.codes
                .iter()
                .map(|&c| (c as f64 * qw + q.bound.b_theta).cos() * q.norm)
                .collect()
        }
        Scheme::LinearBiased | Scheme::LinearUnbiased => {
            let b_g = q.norm;
            let w = 2.0 * b_g / levels;
            q.codes.iter().map(|&c| c as f64 * w - b_g).collect()
        }
        Scheme::Sign => q.codes.iter().map(|&c| if c == 1 { 1.0 } else { -1.0 }).collect(),
        Scheme::SignNorm => {
            let amp = sign_norm_amplitude(q.bound.b_theta) * q.norm;
            q.codes.iter().map(|&c| if c == 1 { amp } else { -amp }).collect()
        }
    };
    GradientVector::new(values)
}
