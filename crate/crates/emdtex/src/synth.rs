//! Deterministic synthetic inputs for tests, benchmarks, and examples.
//!
//! Every generator is a pure function of its arguments; the same seed
//! always produces the same field on every platform, which is what the
//! determinism guarantees elsewhere in the crate are tested against.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::{MultiChannelField, ScalarField, ValueRange};

/// Uniform noise field with entries drawn i.i.d. from `[0, 1)`.
pub fn uniform_field(height: usize, width: usize, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = Array2::from_shape_simple_fn((height, width), || rng.random::<f64>());
    ScalarField::new(data).expect("uniform draws are finite")
}

/// Sum of two egg-crate patterns, `sin(2 pi f x / W) * sin(2 pi f y / H)`
/// at `f_high` and `f_low` cycles per axis.
///
/// Plane waves have ridge lines rather than isolated peaks; the product
/// form gives a dense grid of strict 2D extrema at each scale, so the
/// field genuinely exercises multi-scale decomposition.
pub fn two_scale_field(height: usize, width: usize, f_high: f64, f_low: f64) -> ScalarField {
    let tau = std::f64::consts::TAU;
    ScalarField::from_fn(height, width, |(i, j)| {
        let x = j as f64 / width as f64;
        let y = i as f64 / height as f64;
        let hi = (tau * f_high * x).sin() * (tau * f_high * y).sin();
        let lo = (tau * f_low * x).sin() * (tau * f_low * y).sin();
        hi + lo
    })
}

/// Photograph-like RGB field in `[0, 1]`: a smooth vertical illumination
/// gradient, a handful of soft color blobs, and fine texture noise.
///
/// The blob layout, colors, and noise all derive from `seed`.
pub fn synthetic_photo(height: usize, width: usize, seed: u64) -> MultiChannelField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n_blobs = 3 + (seed % 3) as usize;
    struct Blob {
        ci: f64,
        cj: f64,
        radius: f64,
        color: [f64; 3],
    }
    let blobs: Vec<Blob> = (0..n_blobs)
        .map(|_| Blob {
            ci: rng.random::<f64>() * height as f64,
            cj: rng.random::<f64>() * width as f64,
            radius: (0.08 + 0.17 * rng.random::<f64>()) * height.min(width) as f64,
            color: [
                0.6 * rng.random::<f64>() - 0.3,
                0.6 * rng.random::<f64>() - 0.3,
                0.6 * rng.random::<f64>() - 0.3,
            ],
        })
        .collect();

    let mut channels = [
        Array2::zeros((height, width)),
        Array2::zeros((height, width)),
        Array2::zeros((height, width)),
    ];
    let grad_span = (height.max(2) - 1) as f64;
    for i in 0..height {
        for j in 0..width {
            let base = 0.3 + 0.4 * i as f64 / grad_span;
            let mut px = [base, base * 0.95, base * 0.9];
            for b in &blobs {
                let d2 = (i as f64 - b.ci).powi(2) + (j as f64 - b.cj).powi(2);
                let w = (-d2 / (2.0 * b.radius * b.radius)).exp();
                for (p, c) in px.iter_mut().zip(b.color) {
                    *p += w * c;
                }
            }
            for (ch, p) in channels.iter_mut().zip(px) {
                let noisy = p + 0.02 * (rng.random::<f64>() - 0.5);
                ch[(i, j)] = noisy.clamp(0.0, 1.0);
            }
        }
    }
    MultiChannelField::new(channels, ValueRange::Unit).expect("values clamped to [0, 1]")
}

/// Single real tone sampled at `n` points: `sin(2 pi f t)` for
/// `t = k / n`.
pub fn tone(frequency: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (std::f64::consts::TAU * frequency * k as f64 / n as f64).sin())
        .collect()
}

/// Sum of [`tone`]s at the given frequencies.
pub fn multi_tone(frequencies: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for &f in frequencies {
        for (o, v) in out.iter_mut().zip(tone(f, n)) {
            *o += v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_field_is_seed_deterministic_and_in_range() {
        let a = uniform_field(17, 23, 99);
        let b = uniform_field(17, 23, 99);
        assert_eq!(a.max_abs_diff(&b).unwrap(), 0.0);
        let c = uniform_field(17, 23, 100);
        assert!(a.max_abs_diff(&c).unwrap() > 0.0);
        let (lo, hi) = a.min_max();
        assert!(lo >= 0.0 && hi < 1.0);
    }

    #[test]
    fn two_scale_field_has_unit_amplitude_components() {
        let f = two_scale_field(64, 64, 8.0, 2.0);
        let (lo, hi) = f.min_max();
        assert!(hi <= 2.0 && lo >= -2.0);
        assert!(hi > 0.5, "pattern should actually oscillate, max {hi}");
    }

    #[test]
    fn synthetic_photo_is_deterministic_unit_range() {
        let a = synthetic_photo(24, 20, 9);
        let b = synthetic_photo(24, 20, 9);
        assert_eq!(a.max_abs_diff(&b).unwrap(), 0.0);
        assert_eq!(a.range(), ValueRange::Unit);
        for ch in a.channels() {
            for &v in ch.iter() {
                assert!((0.0..=1.0).contains(&v));
            }
        }
        let c = synthetic_photo(24, 20, 10);
        assert!(a.max_abs_diff(&c).unwrap() > 0.0);
    }

    #[test]
    fn tone_has_expected_zero_crossing_structure() {
        let s = tone(4.0, 256);
        assert_eq!(s.len(), 256);
        assert_eq!(s[0], 0.0);
        // 4 cycles have 8 half-period boundaries; the one at t = 1 falls
        // just past the last sample, leaving 7 sign changes inside.
        let crossings = crate::emd1d::zero_crossings(&s);
        assert_eq!(crossings, 7);
    }

    #[test]
    fn multi_tone_is_pointwise_sum() {
        let a = tone(3.0, 64);
        let b = tone(7.0, 64);
        let m = multi_tone(&[3.0, 7.0], 64);
        for i in 0..64 {
            assert!((m[i] - (a[i] + b[i])).abs() < 1e-15);
        }
    }
}
