//! Order-0 byte entropy.

use super::PackError;

/// Shannon entropy of the byte histogram, in bits per byte (0 to 8).
pub fn byte_entropy(bytes: &[u8]) -> Result<f64, PackError> {
    if bytes.is_empty() {
        return Err(PackError::Empty);
    }
    let mut counts = [0u64; 256];
    for &b in bytes {
        counts[b as usize] += 1;
    }
    let n = bytes.len() as f64;
    let mut h = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    Ok(h)
}
