//! Fixed-width bit packing, little-endian within each byte: the first code
//! occupies the least-significant bits of the first byte.

use super::PackError;

/// Packs `codes` at `bits` per code into `ceil(n * bits / 8)` bytes.
pub fn pack_bits(codes: &[u8], bits: u8) -> Result<Vec<u8>, PackError> {
    debug_assert!((1..=8).contains(&bits));
    let limit = if bits == 8 { u8::MAX } else { (1u8 << bits) - 1 };
    if let Some(&c) = codes.iter().find(|&&c| c > limit) {
        return Err(PackError::CodeOverflow { code: c, bits });
    }
    let total_bits = codes.len() * bits as usize;
    let mut out = vec![0u8; total_bits.div_ceil(8)];
    let mut bitpos = 0usize;
    for &c in codes {
        let byte = bitpos / 8;
        let off = bitpos % 8;
        out[byte] |= c << off;
        let spill = 8usize.saturating_sub(off);
        if (bits as usize) > spill {
            out[byte + 1] |= c >> spill;
        }
        bitpos += bits as usize;
    }
    Ok(out)
}

/// Inverse of [`pack_bits`]: extracts `n` codes of `bits` each.
pub fn unpack_bits(bytes: &[u8], bits: u8, n: usize) -> Result<Vec<u8>, PackError> {
    debug_assert!((1..=8).contains(&bits));
    let total_bits = n * bits as usize;
    let need = total_bits.div_ceil(8);
    if bytes.len() < need {
        return Err(PackError::Truncated { need, have: bytes.len() });
    }
    let mask = if bits == 8 { u8::MAX } else { (1u8 << bits) - 1 };
    let mut out = Vec::with_capacity(n);
    let mut bitpos = 0usize;
    for _ in 0..n {
        let byte = bitpos / 8;
        let off = bitpos % 8;
        let mut v = bytes[byte] >> off;
        let spill = 8 - off;
        if (bits as usize) > spill {
            v |= bytes[byte + 1] << spill;
        }
        out.push(v & mask);
        bitpos += bits as usize;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_byte_for_two_bit_codes() {
        // codes (3,0,1,2) at s = 2 pack into 0b10_01_00_11 = 0x93
        let packed = pack_bits(&[3, 0, 1, 2], 2).unwrap();
        assert_eq!(packed, vec![0x93]);
        assert_eq!(unpack_bits(&packed, 2, 4).unwrap(), vec![3, 0, 1, 2]);
    }

    #[test]
    fn eight_bit_is_identity() {
        let codes = vec![0u8, 1, 127, 255];
        assert_eq!(pack_bits(&codes, 8).unwrap(), codes);
    }

    #[test]
    fn overflow_detected() {
        assert!(matches!(
            pack_bits(&[4], 2),
            Err(PackError::CodeOverflow { code: 4, bits: 2 })
        ));
    }

    #[test]
    fn truncated_input_detected() {
        assert!(matches!(
            unpack_bits(&[0xff], 3, 4),
            Err(PackError::Truncated { .. })
        ));
    }

    #[test]
    fn three_bit_spill_across_bytes() {
        let codes = vec![7u8, 7, 7];
        let packed = pack_bits(&codes, 3).unwrap();
        assert_eq!(packed, vec![0xff, 0x01]);
        assert_eq!(unpack_bits(&packed, 3, 3).unwrap(), codes);
    }

    #[test]
    fn payload_size_formula() {
        for s in 1..=8u8 {
            for n in [1usize, 7, 8, 9, 255] {
                let codes = vec![0u8; n];
                let packed = pack_bits(&codes, s).unwrap();
                assert_eq!(packed.len(), (n * s as usize).div_ceil(8));
            }
        }
    }
}
