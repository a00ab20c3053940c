//! The `.cgp` packet format.
//!
//! Little-endian throughout. A packet is a 27-byte header followed by a raw
//! DEFLATE stream of the bit-packed codes:
//!
//! ```text
//! offset  size  field
//! 0       1     format version (currently 1)
//! 1       1     scheme (low 7 bits), bit 7 = Hadamard-rotated payload
//! 2       1     bits per code (1..=8)
//! 3       4     n, original vector length (u32)
//! 7       4     norm (f32): ||g||_2, or the affine scale b_g for linear
//! 11      4     angle bound b_theta (f32)
//! 15      8     pipeline seed (u64): regenerates the mask and, tagged
//!               separately, the Hadamard sign diagonal; 0 when unused
//! 23      4     kept fraction (f32): 1.0 means no mask
//! 27      ...   DEFLATE payload; absent when norm == 0 (zero gradient)
//! ```
//!
//! The DEFLATE stream is self-terminating, so packets can be concatenated
//! and decoded back-to-back. The payload inflates to exactly
//! `ceil(code_count * bits / 8)` bytes, where the code count follows from
//! `n`, the kept fraction, and power-of-two padding when rotated.

use crate::codec::{AngleBound, MaskDescriptor, QuantizedGradient, Scheme};

use super::{deflate, inflate_prefix, pack_bits, unpack_bits, PackError};

pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 27;

const HADAMARD_FLAG: u8 = 0x80;

fn scheme_byte(s: Scheme) -> u8 {
    match s {
        Scheme::CosineBiased => 0,
        Scheme::CosineUnbiased => 1,
        Scheme::LinearBiased => 2,
        Scheme::LinearUnbiased => 3,
        Scheme::Sign => 4,
        Scheme::SignNorm => 5,
    }
}

fn byte_scheme(b: u8) -> Result<Scheme, PackError> {
    Ok(match b {
        0 => Scheme::CosineBiased,
        1 => Scheme::CosineUnbiased,
        2 => Scheme::LinearBiased,
        3 => Scheme::LinearUnbiased,
        4 => Scheme::Sign,
        5 => Scheme::SignNorm,
        other => return Err(PackError::UnknownScheme(other)),
    })
}

/// A serialized quantized gradient: fixed header plus DEFLATE payload.
#[derive(Debug, Clone, PartialEq)]
pub struct WirePacket {
    pub scheme: Scheme,
    pub hadamard: bool,
    pub bits: u8,
    pub n: u32,
    pub norm: f32,
    pub bound: f32,
    pub seed: u64,
    pub kept_fraction: f32,
    /// DEFLATE-compressed bit-packed codes; empty for zero gradients.
    pub payload: Vec<u8>,
}

impl WirePacket {
    pub fn byte_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.byte_len());
        out.push(FORMAT_VERSION);
        out.push(scheme_byte(self.scheme) | if self.hadamard { HADAMARD_FLAG } else { 0 });
        out.push(self.bits);
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.norm.to_le_bytes());
        out.extend_from_slice(&self.bound.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.kept_fraction.to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }
}

/// Serializes a quantized gradient. Norm and bound are narrowed to f32; the
/// codes are bit-packed and DEFLATE-compressed.
pub fn encode_packet(q: &QuantizedGradient) -> Result<WirePacket, PackError> {
    q.validate()?;
    if q.full_len > u32::MAX as usize {
        return Err(PackError::InvalidField("vector too long for wire format"));
    }
    let (seed, kept_fraction) = match (q.mask, q.hadamard_seed) {
        (Some(m), h) => {
            if let Some(hs) = h {
                if hs != m.seed {
                    return Err(PackError::InvalidField(
                        "mask seed and hadamard seed must share the pipeline seed",
                    ));
                }
            }
            (m.seed, m.kept_fraction as f32)
        }
        (None, Some(hs)) => (hs, 1.0),
        (None, None) => (0, 1.0),
    };
    if q.norm == 0.0 && !q.codes.is_empty() {
        // Only the zero marker may carry norm 0: a zero-norm payload could
        // not be told apart from a missing one when packets are concatenated.
        return Err(PackError::InvalidField("zero-norm packet must carry no codes"));
    }
    let payload = if q.is_zero_marker() {
        Vec::new()
    } else {
        deflate(&pack_bits(&q.codes, q.bits)?)
    };
    Ok(WirePacket {
        scheme: q.scheme,
        hadamard: q.hadamard_seed.is_some(),
        bits: q.bits,
        n: q.full_len as u32,
        norm: q.norm as f32,
        bound: q.bound.b_theta as f32,
        seed,
        kept_fraction,
        payload,
    })
}

/// Decodes one packet from the front of `bytes`, returning the gradient and
/// the number of bytes consumed (packets may be concatenated).
pub fn decode_packet(bytes: &[u8]) -> Result<(QuantizedGradient, usize), PackError> {
    if bytes.len() < HEADER_LEN {
        return Err(PackError::Truncated { need: HEADER_LEN, have: bytes.len() });
    }
    let version = bytes[0];
    if version != FORMAT_VERSION {
        return Err(PackError::VersionMismatch(version));
    }
    let scheme = byte_scheme(bytes[1] & !HADAMARD_FLAG)?;
    let hadamard = bytes[1] & HADAMARD_FLAG != 0;
    let bits = bytes[2];
    if !(1..=8).contains(&bits) {
        return Err(PackError::InvalidField("bits out of range"));
    }
    let n = u32::from_le_bytes(bytes[3..7].try_into().unwrap());
    let norm = f32::from_le_bytes(bytes[7..11].try_into().unwrap());
    let bound = f32::from_le_bytes(bytes[11..15].try_into().unwrap());
    let seed = u64::from_le_bytes(bytes[15..23].try_into().unwrap());
    let kept_fraction = f32::from_le_bytes(bytes[23..27].try_into().unwrap());
    if !norm.is_finite() || norm < 0.0 {
        return Err(PackError::InvalidField("norm must be finite and nonnegative"));
    }
    if !(0.0..std::f32::consts::FRAC_PI_2).contains(&bound) {
        return Err(PackError::InvalidField("bound out of range"));
    }
    if !(kept_fraction > 0.0 && kept_fraction <= 1.0) {
        return Err(PackError::InvalidField("kept fraction out of range"));
    }

    let mask = if kept_fraction < 1.0 {
        Some(MaskDescriptor { seed, kept_fraction: kept_fraction as f64 })
    } else {
        None
    };
    let mut q = QuantizedGradient {
        codes: Vec::new(),
        bits,
        bound: AngleBound { b_theta: bound as f64, clip_fraction: 0.0 },
        norm: norm as f64,
        scheme,
        full_len: n as usize,
        mask,
        hadamard_seed: hadamard.then_some(seed),
    };

    if norm == 0.0 {
        return Ok((q, HEADER_LEN));
    }
    let code_count = q.expected_code_len();
    let (packed, used) = inflate_prefix(&bytes[HEADER_LEN..])?;
    let expect_bytes = (code_count * bits as usize).div_ceil(8);
    if packed.len() != expect_bytes {
        return Err(PackError::CorruptStream(format!(
            "payload inflated to {} bytes, expected {expect_bytes}",
            packed.len()
        )));
    }
    q.codes = unpack_bits(&packed, bits, code_count)?;
    q.validate()?;
    Ok((q, HEADER_LEN + used))
}
