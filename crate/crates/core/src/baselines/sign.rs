//! Sign-based 1-bit compressors.
//!
//! `sign_sgd` transmits bare signs (decodes to +/-1, scale-free).
//! `sign_sgd_norm` additionally carries the norm and decodes to
//! `+/- ||g|| / sqrt(n)` so the decoded vector's L2 norm equals `||g||`; it
//! is encoded as a `SignNorm` packet whose bound is chosen so the shared
//! center-amplitude decode rule `cos(b/2 + pi/4) * norm` lands exactly on
//! `norm / sqrt(n)`. `ef_sign_step` is the scaled-sign compressor
//! `(||p||_1 / n) * sign(p)` with a persistent residual.

use std::f64::consts::FRAC_PI_2;

use crate::codec::{dequantize, AngleBound, CodecError, GradientVector, QuantizedGradient, Scheme};

fn sign_codes(values: &[f64]) -> Vec<u8> {
    // sign(0) = +1, fixed tie rule.
    values.iter().map(|&v| u8::from(v >= 0.0)).collect()
}

/// Angle bound at which the 1-bit center amplitude equals the target ratio:
/// solves `cos(b/2 + pi/4) = ratio` for `b` in `[0, pi/2)`. Amplitudes above
/// `cos(pi/4)` are not representable (the bound cannot go negative); only a
/// single-entry vector asks for one, and it caps there.
fn bound_for_amplitude(ratio: f64) -> f64 {
    let ratio = ratio.clamp(0.0, 1.0).min(std::f64::consts::FRAC_1_SQRT_2);
    (2.0 * ratio.acos() - FRAC_PI_2).clamp(0.0, FRAC_PI_2 - crate::codec::BOUND_EPS)
}

/// Bare signSGD: 1 bit per entry, decodes to +/-1.
pub fn sign_sgd(g: &GradientVector) -> QuantizedGradient {
    QuantizedGradient {
        codes: sign_codes(g.values()),
        bits: 1,
        bound: AngleBound { b_theta: 0.0, clip_fraction: 0.0 },
        norm: g.norm(),
        scheme: Scheme::Sign,
        full_len: g.len(),
        mask: None,
        hadamard_seed: None,
    }
}

/// signSGD with the norm attached: decodes to `+/- ||g|| / sqrt(n)`.
pub fn sign_sgd_norm(g: &GradientVector) -> Result<QuantizedGradient, CodecError> {
    if g.norm() == 0.0 {
        return Err(CodecError::ZeroNorm);
    }
    let ratio = 1.0 / (g.len() as f64).sqrt();
    Ok(QuantizedGradient {
        codes: sign_codes(g.values()),
        bits: 1,
        bound: AngleBound { b_theta: bound_for_amplitude(ratio), clip_fraction: 0.0 },
        norm: g.norm(),
        scheme: Scheme::SignNorm,
        full_len: g.len(),
        mask: None,
        hadamard_seed: None,
    })
}

/// Per-layer compression residual, carried across the rounds a client is
/// selected. Single-owner state.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorFeedbackState {
    residual: Vec<f64>,
}

impl ErrorFeedbackState {
    pub fn zeros(len: usize) -> Self {
        Self { residual: vec![0.0; len] }
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }
}

/// One EF-signSGD step: compress `p = g + residual` as
/// `(||p||_1 / n) * sign(p)` and keep `residual = p - decoded`.
pub fn ef_sign_step(
    g: &GradientVector,
    state: &mut ErrorFeedbackState,
) -> Result<QuantizedGradient, CodecError> {
    if state.residual.len() != g.len() {
        return Err(CodecError::DimMismatch { expected: state.residual.len(), got: g.len() });
    }
    let p: Vec<f64> = g.values().iter().zip(&state.residual).map(|(a, b)| a + b).collect();
    let p = GradientVector::new(p)?;
    if p.norm() == 0.0 {
        // Nothing to transmit: decoded is zero, so the residual resets to
        // p - 0 = 0.
        state.residual.iter_mut().for_each(|r| *r = 0.0);
        return Ok(QuantizedGradient::zero(Scheme::SignNorm, 1, g.len()));
    }
    let mean_abs = p.values().iter().map(|v| v.abs()).sum::<f64>() / p.len() as f64;
    // ||p||_1 / (n ||p||_2) <= 1/sqrt(n) by Cauchy-Schwarz, so a bound always exists.
    let ratio = mean_abs / p.norm();
    let q = QuantizedGradient {
        codes: sign_codes(p.values()),
        bits: 1,
        bound: AngleBound { b_theta: bound_for_amplitude(ratio), clip_fraction: 0.0 },
        norm: p.norm(),
        scheme: Scheme::SignNorm,
        full_len: p.len(),
        mask: None,
        hadamard_seed: None,
    };
    let decoded = dequantize(&q)?;
    for ((r, pv), dv) in state.residual.iter_mut().zip(p.values()).zip(decoded.values()) {
        *r = pv - dv;
    }
    Ok(q)
}
