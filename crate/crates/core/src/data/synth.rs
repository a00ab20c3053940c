//! Seeded synthetic datasets: Gaussian blobs for fast CI-scale runs, and an
//! image-shaped surrogate for desk-scale experiments when the real IDX files
//! are not on disk.

use rand::Rng;
use rand_distr::StandardNormal;

use super::Dataset;
use crate::rng::{rng_from, tag};

/// Gaussian clusters around seeded class centers in `[0.2, 0.8]^dim`,
/// clamped to `[0, 1]`. Labels are striped (`i % classes`) so class priors
/// are uniform to within one example.
pub fn synth_blobs(classes: usize, n: usize, dim: usize, noise: f64, seed: u64) -> Dataset {
    assert!((1..=256).contains(&classes) && dim >= 1);
    let mut rng = rng_from(&[seed, tag::DATA, 1]);
    let centers: Vec<f32> = (0..classes * dim)
        .map(|_| rng.gen_range(0.2..0.8) as f32)
        .collect();
    let mut features = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % classes;
        let center = &centers[class * dim..(class + 1) * dim];
        for &c in center {
            let z: f64 = rng.sample(StandardNormal);
            features.push((c as f64 + noise * z).clamp(0.0, 1.0) as f32);
        }
        labels.push(class as u8);
    }
    Dataset::new(features, dim, labels).expect("construction is shape-consistent")
}

/// 28x28 image-like surrogate: each class is a smooth prototype of bright
/// bumps, two of which are shared across all classes so classes overlap.
/// Samples apply a random +/-3 pixel translation, an intensity scale, a
/// random occluded quadrant, and per-pixel noise. Deliberately harder than
/// nearest-prototype matching so a training curve is visible at desk scale.
pub fn synth_images(n: usize, noise: f64, seed: u64) -> Dataset {
    const SIDE: usize = 28;
    const DIM: usize = SIDE * SIDE;
    const CLASSES: usize = 10;
    let mut rng = rng_from(&[seed, tag::DATA, 2]);

    fn add_bump(protos: &mut [f64], c: usize, cx: f64, cy: f64, amp: f64, s2: f64) {
        const SIDE: usize = 28;
        const DIM: usize = SIDE * SIDE;
        for y in 0..SIDE {
            for x in 0..SIDE {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                protos[c * DIM + y * SIDE + x] += amp * (-d2 / (2.0 * s2)).exp();
            }
        }
    }

    let mut protos = vec![0.0f64; CLASSES * DIM];
    // Shared strokes first (same field for every class), then three
    // class-specific ones.
    for _ in 0..2 {
        let cx = rng.gen_range(8.0..20.0);
        let cy = rng.gen_range(8.0..20.0);
        let s2 = rng.gen_range(6.0..12.0);
        for c in 0..CLASSES {
            add_bump(&mut protos, c, cx, cy, 0.55, s2);
        }
    }
    for c in 0..CLASSES {
        for _ in 0..3 {
            let cx = rng.gen_range(7.0..21.0);
            let cy = rng.gen_range(7.0..21.0);
            let amp = rng.gen_range(0.45..0.85);
            let s2 = rng.gen_range(4.0..12.0);
            add_bump(&mut protos, c, cx, cy, amp, s2);
        }
    }
    for p in protos.iter_mut() {
        *p = p.clamp(0.0, 1.0);
    }

    let mut features = Vec::with_capacity(n * DIM);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % CLASSES;
        let proto = &protos[class * DIM..(class + 1) * DIM];
        let dx = rng.gen_range(-3i32..=3) as isize;
        let dy = rng.gen_range(-3i32..=3) as isize;
        let scale = rng.gen_range(0.55..1.0);
        let occluded = rng.gen_range(0u8..8); // quadrant 0..3 blanked, 4..7 none
        for y in 0..SIDE {
            for x in 0..SIDE {
                let sx = (x as isize + dx).clamp(0, SIDE as isize - 1) as usize;
                let sy = (y as isize + dy).clamp(0, SIDE as isize - 1) as usize;
                let quadrant = (y >= SIDE / 2) as u8 * 2 + (x >= SIDE / 2) as u8;
                let base = if occluded == quadrant { 0.0 } else { proto[sy * SIDE + sx] * scale };
                let z: f64 = rng.sample(StandardNormal);
                features.push((base + noise * z).clamp(0.0, 1.0) as f32);
            }
        }
        labels.push(class as u8);
    }
    Dataset::new(features, DIM, labels).expect("construction is shape-consistent")
}

/// Synthetic gradient vector with the statistics real training gradients
/// show: a Gaussian bulk plus a sparse heavy tail (here 0.5% of entries at
/// 50x the bulk scale). Plain iid Gaussians are far lighter-tailed than any
/// network's gradients and understate how compressible quantized codes are.
pub fn synth_gradient(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from(&[seed, tag::DATA, 3]);
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            let scale = if rng.gen::<f64>() < 0.005 { 50.0 } else { 1.0 };
            z * scale
        })
        .collect()
}
