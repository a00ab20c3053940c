//! Per-interval quantization-error analysis.
//!
//! For interval width `q = (pi - 2b)/2^s`, the worst-case reconstruction
//! error of an entry falling in interval `k` (round-to-nearest codes, left
//! grid-point reconstruction) is the cosine drop over the interval's second
//! half,
//!
//! `cos(b + q (k + 1/2)) - cos(b + q (k + 1)) = 2 sin(b + q (k + 3/4)) sin(q / 4)`
//!
//! per unit norm. It grows with `k` on `[b, pi/2)`: intervals holding larger
//! magnitudes are finer. Comparing against the uniform linear bound
//! `cos(b)/2^s` per interval tells how many intervals the nonlinear
//! partition wins.

use super::{AngleBound, CodecError, RANGE_EPS};

/// Worst-case error within interval `k`, for a unit-norm vector.
///
/// The offset `b` participates in the sine: dropping it (as the shorthand
/// `2 sin(q(k+3/4)) sin(q/4)` does) gives the same value at `b = 0` but
/// understates the error of every interval once the range is narrowed.
pub fn interval_error_bound(k: u32, bound: &AngleBound, bits: u8) -> f64 {
    let q = bound.interval_width(bits);
    2.0 * (bound.b_theta + q * (k as f64 + 0.75)).sin() * (q * 0.25).sin()
}

/// Worst-case reconstruction error for a single entry `g_i` of a vector with
/// the given norm, under biased s-bit quantization on `[b, pi - b]`.
///
/// Defined on the positive half `[b, pi/2)`; negative entries mirror onto it
/// through `|g_i|` (the angle grid is symmetric about pi/2).
pub fn error_bound(g_i: f64, norm: f64, bound: &AngleBound, bits: u8) -> Result<f64, CodecError> {
    if norm <= 0.0 {
        return Err(CodecError::ZeroNorm);
    }
    if g_i.abs() > norm * (1.0 + 1e-12) {
        return Err(CodecError::InvalidParam("|g_i| must not exceed the norm"));
    }
    let q = bound.interval_width(bits);
    if q * (1u64 << bits) as f64 > std::f64::consts::PI {
        // b < 0 cannot happen through AngleBound; guard anyway
        return Err(CodecError::InvalidParam("bound out of range"));
    }
    if q < RANGE_EPS {
        return Err(CodecError::DegenerateRange(RANGE_EPS));
    }
    let theta = (g_i.abs() / norm).clamp(0.0, 1.0).acos();
    let k = ((theta - bound.b_theta) / q).floor().max(0.0) as u32;
    Ok(interval_error_bound(k, bound, bits) * norm)
}

/// One row of the interval comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalRow {
    pub k: u32,
    /// Cosine-scheme worst-case error for this interval (unit norm).
    pub cosine_bound: f64,
    /// Uniform linear-scheme bound `cos(b)/2^s` (unit norm).
    pub linear_bound: f64,
    pub better: bool,
}

/// Evaluates the comparison condition for every interval `k = 0 .. 2^s - 1`.
pub fn interval_table(bits: u8, bound: &AngleBound) -> Vec<IntervalRow> {
    let linear = bound.b_theta.cos() / (1u64 << bits) as f64;
    (0..(1u32 << bits))
        .map(|k| {
            let cb = interval_error_bound(k, bound, bits);
            IntervalRow { k, cosine_bound: cb, linear_bound: linear, better: cb < linear }
        })
        .collect()
}

/// Counts the quantization intervals whose error bound beats the linear one,
/// over all `2^s` intervals. Returns the count and its fraction of `2^s`.
pub fn count_better_intervals(bits: u8, bound: &AngleBound) -> (usize, f64) {
    let rows = interval_table(bits, bound);
    let count = rows.iter().filter(|r| r.better).count();
    (count, count as f64 / rows.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const B0: AngleBound = AngleBound { b_theta: 0.0, clip_fraction: 0.0 };

    #[test]
    fn bound_at_k0_direct_substitution() {
        // At b = 0 the bound is exactly 2 sin(3q/4) sin(q/4) * norm.
        let s = 8u8;
        let q = B0.interval_width(s);
        let norm = 2.5;
        let e = error_bound(norm, norm, &B0, s).unwrap();
        let expect = 2.0 * (q * 0.75).sin() * (q * 0.25).sin() * norm;
        assert!((e - expect).abs() < 1e-12);

        // With a positive bound the offset enters the sine.
        let bound = AngleBound { b_theta: 0.1, clip_fraction: 0.0 };
        let q = bound.interval_width(s);
        let g_i = bound.b_theta.cos() * norm;
        let e = error_bound(g_i, norm, &bound, s).unwrap();
        let expect = 2.0 * (bound.b_theta + q * 0.75).sin() * (q * 0.25).sin() * norm;
        assert!((e - expect).abs() < 1e-12);
        // ...and equals the true cosine drop over the interval's second half.
        let drop = (bound.b_theta + q * 0.5).cos() - (bound.b_theta + q).cos();
        assert!((e - drop * norm).abs() < 1e-12);
    }

    #[test]
    fn bound_monotone_in_k_on_positive_half() {
        for s in 1..=8u8 {
            for b in [0.0, 0.3, 1.0] {
                let bound = AngleBound { b_theta: b, clip_fraction: 0.0 };
                let half = 1u32 << (s - 1);
                let mut prev = -1.0;
                for k in 0..half {
                    let e = interval_error_bound(k, &bound, s);
                    assert!(e > prev, "s={s} b={b} k={k}: {e} <= {prev}");
                    prev = e;
                }
            }
        }
    }

    #[test]
    fn negative_entries_mirror() {
        let bound = AngleBound { b_theta: 0.2, clip_fraction: 0.0 };
        let a = error_bound(0.7, 1.0, &bound, 4).unwrap();
        let b = error_bound(-0.7, 1.0, &bound, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fraction_two_bits_is_exactly_half() {
        let (count, fraction) = count_better_intervals(2, &B0);
        assert_eq!(count, 2);
        assert_eq!(fraction, 0.5);
    }

    #[test]
    fn fraction_four_bits() {
        let (_, fraction) = count_better_intervals(4, &B0);
        assert!((fraction - 0.429).abs() < 0.01, "fraction {fraction}");
    }

    #[test]
    fn fraction_eight_bits() {
        let (_, fraction) = count_better_intervals(8, &B0);
        assert!((fraction - 0.441).abs() < 0.01, "fraction {fraction}");
    }

    #[test]
    fn table_shape() {
        let rows = interval_table(3, &B0);
        assert_eq!(rows.len(), 8);
        assert!(rows[0].better);
        assert!((rows[0].linear_bound - 1.0 / 8.0).abs() < 1e-15);
    }
}
