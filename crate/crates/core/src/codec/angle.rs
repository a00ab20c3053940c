//! Angle transform and bound computation.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{AngleBound, AngleVector, CodecError, GradientVector, BOUND_EPS};

/// Which expression computes the automatic bound from the angle extremes.
///
/// `RangeSymmetric` is `min(min(theta), pi - max(theta))`, matching the
/// quantization range `[b, pi - b]`. `LiteralOne` is `min(min(theta),
/// 1 - max(theta))`; it is kept selectable for comparison but mixes a pure
/// number with radians and easily collapses to the clamp floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundFormula {
    #[default]
    RangeSymmetric,
    LiteralOne,
}

/// Maps each entry to `arccos(g_i / ||g||)`.
///
/// The ratio is clamped to `[-1, 1]` before `arccos`: roundoff can push
/// `g_i / ||g||` one ulp past 1 when a single entry dominates.
pub fn compute_angles(g: &GradientVector) -> Result<AngleVector, CodecError> {
    if g.norm() == 0.0 {
        return Err(CodecError::ZeroNorm);
    }
    let inv = 1.0 / g.norm();
    let angles = g
        .values()
        .iter()
        .map(|&v| (v * inv).clamp(-1.0, 1.0).acos())
        .collect();
    Ok(AngleVector::from_raw(angles))
}

/// Automatic bound from the angle extremes, clamped into `[0, pi/2 - eps]`.
pub fn compute_bound_auto(theta: &AngleVector, formula: BoundFormula) -> Result<AngleBound, CodecError> {
    if theta.is_empty() {
        return Err(CodecError::Empty);
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &a in theta.angles() {
        min = min.min(a);
        max = max.max(a);
    }
    let raw = match formula {
        BoundFormula::RangeSymmetric => min.min(PI - max),
        BoundFormula::LiteralOne => min.min(1.0 - max),
    };
    Ok(AngleBound {
        b_theta: raw.clamp(0.0, FRAC_PI_2 - BOUND_EPS),
        clip_fraction: 0.0,
    })
}

/// Bound from clipping the top `clip_fraction` magnitudes.
///
/// The threshold `b_g` is the largest magnitude left after removing the top
/// `clip_fraction * n` entries; entries strictly above `b_g` have their
/// angles clamped into `[b, pi - b]`, ties at `b_g` are untouched. The norm
/// stays the norm of the original, unclipped vector.
pub fn compute_bound_clipped(
    g: &GradientVector,
    clip_fraction: f64,
) -> Result<(AngleBound, AngleVector), CodecError> {
    if g.norm() == 0.0 {
        return Err(CodecError::ZeroNorm);
    }
    if !(0.0..0.5).contains(&clip_fraction) || clip_fraction == 0.0 {
        return Err(CodecError::InvalidParam("clip_fraction must be in (0, 0.5)"));
    }
    let n = g.len();
    let mut mags: Vec<f64> = g.values().iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    // 1-indexed rank of the threshold magnitude in ascending order.
    let rank = (((1.0 - clip_fraction) * n as f64).ceil() as usize).clamp(1, n);
    let b_g = mags[rank - 1];

    let b_theta = (b_g / g.norm())
        .min(1.0)
        .acos()
        .clamp(0.0, FRAC_PI_2 - BOUND_EPS);
    let bound = AngleBound { b_theta, clip_fraction };

    let lo = b_theta;
    let hi = PI - b_theta;
    let angles = compute_angles(g)?
        .angles()
        .iter()
        .map(|&a| a.clamp(lo, hi))
        .collect();
    Ok((bound, AngleVector::from_raw(angles)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn gv(values: &[f64]) -> GradientVector {
        GradientVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn angles_axis_aligned() {
        let g = gv(&[2.5, 0.0, 0.0]);
        let theta = compute_angles(&g).unwrap();
        assert!((theta.angles()[0] - 0.0).abs() < 1e-12);
        assert!((theta.angles()[1] - FRAC_PI_2).abs() < 1e-12);
        assert!((theta.angles()[2] - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn angles_symmetric_pair() {
        let g = gv(&[1.0, -1.0]);
        let theta = compute_angles(&g).unwrap();
        assert!((theta.angles()[0] - FRAC_PI_4).abs() < 1e-12);
        assert!((theta.angles()[1] - 3.0 * FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn angles_zero_norm_rejected() {
        let g = gv(&[0.0, 0.0]);
        assert_eq!(compute_angles(&g), Err(CodecError::ZeroNorm));
    }

    #[test]
    fn angles_roundtrip_gaussian() {
        // cos(theta) * norm must reproduce g.
        let mut rng = crate::rng::rng_from(&[11]);
        use rand::Rng;
        let vals: Vec<f64> = (0..1000).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let g = gv(&vals);
        let theta = compute_angles(&g).unwrap();
        for (a, v) in theta.angles().iter().zip(g.values()) {
            assert!((0.0..=PI).contains(a));
            assert!((a.cos() * g.norm() - v).abs() < 1e-6 * g.norm().max(1.0));
        }
    }

    #[test]
    fn bound_auto_symmetric_set() {
        let theta = AngleVector::from_raw(vec![PI / 3.0, FRAC_PI_2, 2.0 * PI / 3.0]);
        let b = compute_bound_auto(&theta, BoundFormula::RangeSymmetric).unwrap();
        assert!((b.b_theta - PI / 3.0).abs() < 1e-12);
        assert_eq!(b.clip_fraction, 0.0);
    }

    #[test]
    fn bound_auto_degenerate_clamps() {
        let theta = AngleVector::from_raw(vec![FRAC_PI_2, FRAC_PI_2]);
        let b = compute_bound_auto(&theta, BoundFormula::RangeSymmetric).unwrap();
        assert!((b.b_theta - (FRAC_PI_2 - BOUND_EPS)).abs() < 1e-12);
    }

    #[test]
    fn bound_auto_gaussian_is_wide() {
        // In high dimension max |g_i|/||g|| is small, so the bound sits near pi/2.
        let mut rng = crate::rng::rng_from(&[12]);
        use rand::Rng;
        let vals: Vec<f64> = (0..10_000)
            .map(|_| {
                // sum of uniforms approximates a normal well enough here
                (0..6).map(|_| rng.gen::<f64>() - 0.5).sum::<f64>()
            })
            .collect();
        let g = gv(&vals);
        let theta = compute_angles(&g).unwrap();
        let b = compute_bound_auto(&theta, BoundFormula::RangeSymmetric).unwrap();
        assert!(b.b_theta > 1.4, "bound {} not > 1.4", b.b_theta);
    }

    #[test]
    fn bound_literal_formula_differs() {
        let theta = AngleVector::from_raw(vec![0.8, 0.9]);
        let sym = compute_bound_auto(&theta, BoundFormula::RangeSymmetric).unwrap();
        let lit = compute_bound_auto(&theta, BoundFormula::LiteralOne).unwrap();
        assert!((sym.b_theta - 0.8).abs() < 1e-12);
        assert!((lit.b_theta - 0.1).abs() < 1e-12); // 1 - 0.9
    }

    #[test]
    fn clipped_single_dominating_dimension() {
        let mut vals = vec![1.0; 100];
        vals[0] = 10.0;
        let g = gv(&vals);
        let (bound, theta) = compute_bound_clipped(&g, 0.01).unwrap();
        // b_g = 1: the lone top entry is clipped.
        let expect = (1.0 / g.norm()).acos();
        assert!((bound.b_theta - expect).abs() < 1e-12);
        for &a in theta.angles() {
            assert!(a >= bound.b_theta - 1e-12 && a <= PI - bound.b_theta + 1e-12);
        }
        // The dominating entry sits exactly at the clamp edge.
        assert!((theta.angles()[0] - bound.b_theta).abs() < 1e-12);
    }

    #[test]
    fn clipped_all_ties_untouched() {
        let g = gv(&[1.0, 1.0, 1.0, 1.0]);
        let (bound, theta) = compute_bound_clipped(&g, 0.25).unwrap();
        // b_g = 1, no entry exceeds it, so the angles equal the raw transform.
        let raw = compute_angles(&g).unwrap();
        for (a, r) in theta.angles().iter().zip(raw.angles()) {
            assert!((a - r).abs() < 1e-12);
        }
        assert!((bound.b_theta - (0.5f64).acos()).abs() < 1e-12);
    }

    #[test]
    fn clipped_tightens_gaussian_bound() {
        let mut rng = crate::rng::rng_from(&[13]);
        use rand::Rng;
        let vals: Vec<f64> = (0..10_000)
            .map(|_| (0..6).map(|_| rng.gen::<f64>() - 0.5).sum::<f64>())
            .collect();
        let g = gv(&vals);
        let auto = compute_bound_auto(&compute_angles(&g).unwrap(), BoundFormula::RangeSymmetric).unwrap();
        let (clipped, _) = compute_bound_clipped(&g, 0.01).unwrap();
        assert!(
            clipped.b_theta > auto.b_theta,
            "clipping should tighten: {} vs {}",
            clipped.b_theta,
            auto.b_theta
        );
    }
}
