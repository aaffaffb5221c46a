//! Frequency-domain set comparison.
//!
//! Image sets are compared by averaging their unnormalized forward 2-D
//! DFTs per frequency bin, taking the modulus of that complex mean, and
//! measuring the mean squared gap between the two magnitude surfaces.
//! Averaging happens on complex spectra first, the modulus comes after;
//! swapping that order measures something else. Complex means are
//! accumulated by pairwise summation over the image list in index order,
//! so the result does not depend on how the per-image transforms were
//! scheduled.

use ndarray::Array2;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::{shape_mismatch, MultiChannelField, ScalarField};

/// Unnormalized forward 2-D DFT (negative exponent, no 1/N factor):
/// rows transformed first, then columns.
pub fn fft_2d(f: &ScalarField) -> Array2<Complex<f64>> {
    let (h, w) = (f.height(), f.width());
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_forward(w);
    let col_fft = planner.plan_fft_forward(h);

    let mut data: Vec<Complex<f64>> = f.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
    for row in data.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let mut transposed = vec![Complex::new(0.0, 0.0); h * w];
    for i in 0..h {
        for j in 0..w {
            transposed[j * h + i] = data[i * w + j];
        }
    }
    for column in transposed.chunks_exact_mut(h) {
        col_fft.process(column);
    }
    Array2::from_shape_fn((h, w), |(i, j)| transposed[j * h + i])
}

/// Complex mean spectrum of an image set plus its magnitude surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumStats {
    mean_spectrum: Array2<Complex<f64>>,
    magnitude: Array2<f64>,
    n_images: usize,
}

impl SpectrumStats {
    /// Wraps an already-averaged spectrum; the magnitude surface is
    /// derived here so it always matches the mean.
    pub fn from_mean(mean_spectrum: Array2<Complex<f64>>, n_images: usize) -> Result<Self> {
        if n_images == 0 {
            return Err(Error::EmptySet {
                context: "spectrum statistics need at least one image".into(),
            });
        }
        let magnitude = mean_spectrum.mapv(|c| c.norm());
        Ok(SpectrumStats {
            mean_spectrum,
            magnitude,
            n_images,
        })
    }

    pub fn mean_spectrum(&self) -> &Array2<Complex<f64>> {
        &self.mean_spectrum
    }

    pub fn magnitude(&self) -> &Array2<f64> {
        &self.magnitude
    }

    pub fn n_images(&self) -> usize {
        self.n_images
    }

    pub fn dims(&self) -> (usize, usize) {
        self.mean_spectrum.dim()
    }
}

/// Pairwise (tree) sum over the list in index order: deterministic and
/// far less accumulation error than a running sum.
fn pairwise_sum(mut layer: Vec<Array2<Complex<f64>>>) -> Array2<Complex<f64>> {
    debug_assert!(!layer.is_empty());
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        let mut iter = layer.into_iter();
        while let Some(mut a) = iter.next() {
            if let Some(b) = iter.next() {
                a.zip_mut_with(&b, |x, &y| *x += y);
            }
            next.push(a);
        }
        layer = next;
    }
    layer.pop().expect("non-empty layer")
}

/// Average of the unnormalized DFTs of `images`, which must all be
/// `height`x`width`. Per-image transforms run in parallel; the reduction
/// order is fixed, so results are identical across thread counts.
pub fn mean_spectrum(
    images: &[ScalarField],
    height: usize,
    width: usize,
) -> Result<SpectrumStats> {
    if images.is_empty() {
        return Err(Error::EmptySet {
            context: "mean_spectrum over zero images".into(),
        });
    }
    for img in images {
        if (img.height(), img.width()) != (height, width) {
            return Err(shape_mismatch((height, width), (img.height(), img.width())));
        }
    }
    let spectra: Vec<Array2<Complex<f64>>> = images.par_iter().map(fft_2d).collect();
    let mut mean = pairwise_sum(spectra);
    let inv = 1.0 / images.len() as f64;
    mean.mapv_inplace(|c| c * inv);
    SpectrumStats::from_mean(mean, images.len())
}

/// Mean squared gap between two magnitude surfaces:
/// `(1/XY) * Σ (‖A‖ - ‖B‖)²`. Symmetric and nonnegative; zero for
/// identical sets.
pub fn spectral_difference(gen: &SpectrumStats, real: &SpectrumStats) -> Result<f64> {
    if gen.dims() != real.dims() {
        return Err(shape_mismatch(gen.dims(), real.dims()));
    }
    let (h, w) = gen.dims();
    let mut acc = 0.0;
    for (a, b) in gen.magnitude.iter().zip(real.magnitude.iter()) {
        let d = a - b;
        acc += d * d;
    }
    Ok(acc / (h * w) as f64)
}

/// Rec.601 luma: `0.299 R + 0.587 G + 0.114 B`.
pub fn color_to_scalar(image: &MultiChannelField) -> ScalarField {
    let (r, g, b) = (image.channel(0), image.channel(1), image.channel(2));
    let mut out = r.mapv(|v| v * 0.299);
    out.zip_mut_with(g, |o, &v| *o += v * 0.587);
    out.zip_mut_with(b, |o, &v| *o += v * 0.114);
    ScalarField::from_array_unchecked(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ValueRange;
    use crate::synth;

    /// O(N⁴) direct DFT, the independent oracle for the fast path.
    fn naive_dft(f: &ScalarField) -> Array2<Complex<f64>> {
        let (h, w) = (f.height(), f.width());
        Array2::from_shape_fn((h, w), |(u, v)| {
            let mut acc = Complex::new(0.0, 0.0);
            for i in 0..h {
                for j in 0..w {
                    let phase = -2.0
                        * std::f64::consts::PI
                        * (u as f64 * i as f64 / h as f64 + v as f64 * j as f64 / w as f64);
                    acc += Complex::new(0.0, phase).exp() * f[(i, j)];
                }
            }
            acc
        })
    }

    fn max_complex_diff(a: &Array2<Complex<f64>>, b: &Array2<Complex<f64>>) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn fft_matches_naive_dft() {
        for (h, w, seed) in [(8, 8, 1), (16, 16, 2), (8, 16, 3), (12, 10, 4)] {
            let f = synth::uniform_field(h, w, seed);
            let fast = fft_2d(&f);
            let slow = naive_dft(&f);
            let err = max_complex_diff(&fast, &slow);
            assert!(err <= 1e-9, "{h}x{w}: max err {err}");
        }
    }

    #[test]
    fn single_image_magnitude_is_its_dft_modulus() {
        let f = synth::uniform_field(8, 8, 5);
        let stats = mean_spectrum(std::slice::from_ref(&f), 8, 8).unwrap();
        let direct = fft_2d(&f);
        for (m, c) in stats.magnitude().iter().zip(direct.iter()) {
            assert_eq!(*m, c.norm());
        }
        assert_eq!(stats.n_images(), 1);
    }

    #[test]
    fn opposite_images_cancel_to_zero_mean() {
        let f = synth::uniform_field(8, 8, 6);
        let neg = ScalarField::from_fn(8, 8, |(i, j)| -f[(i, j)]);
        let stats = mean_spectrum(&[f, neg], 8, 8).unwrap();
        for c in stats.mean_spectrum().iter() {
            assert_eq!(*c, Complex::new(0.0, 0.0));
        }
        for m in stats.magnitude().iter() {
            assert_eq!(*m, 0.0);
        }
    }

    #[test]
    fn mean_of_four_fields_matches_naive_oracle() {
        let images: Vec<ScalarField> = (0..4).map(|s| synth::uniform_field(8, 8, 40 + s)).collect();
        let stats = mean_spectrum(&images, 8, 8).unwrap();
        let mut oracle = Array2::from_elem((8, 8), Complex::new(0.0, 0.0));
        for img in &images {
            oracle.zip_mut_with(&naive_dft(img), |a, &b| *a += b);
        }
        oracle.mapv_inplace(|c| c / 4.0);
        assert!(max_complex_diff(stats.mean_spectrum(), &oracle) <= 1e-9);
        for (m, c) in stats.magnitude().iter().zip(oracle.iter()) {
            assert!((m - c.norm()).abs() <= 1e-9);
        }
    }

    #[test]
    fn dc_bin_equals_mean_total_intensity() {
        let images: Vec<ScalarField> =
            (0..3).map(|s| synth::uniform_field(16, 16, 70 + s)).collect();
        let stats = mean_spectrum(&images, 16, 16).unwrap();
        let mean_sum: f64 =
            images.iter().map(|f| f.values().sum()).sum::<f64>() / images.len() as f64;
        let dc = stats.magnitude()[(0, 0)];
        assert!((dc - mean_sum.abs()).abs() <= 1e-9 * mean_sum.abs().max(1.0));
    }

    #[test]
    fn difference_is_a_symmetric_nonnegative_gap() {
        let a = mean_spectrum(&[synth::uniform_field(8, 8, 8)], 8, 8).unwrap();
        let b = mean_spectrum(&[synth::uniform_field(8, 8, 9)], 8, 8).unwrap();
        let ab = spectral_difference(&a, &b).unwrap();
        let ba = spectral_difference(&b, &a).unwrap();
        assert_eq!(ab, ba);
        assert!(ab >= 0.0);
        assert_eq!(spectral_difference(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn constant_magnitude_offset_gives_c_squared() {
        let base = mean_spectrum(&[synth::uniform_field(8, 8, 10)], 8, 8).unwrap();
        let c = 2.5;
        // Scale each complex bin so its modulus grows by exactly c; zero
        // bins get a pure real c.
        let shifted = base.mean_spectrum().mapv(|z| {
            let m = z.norm();
            if m == 0.0 {
                Complex::new(c, 0.0)
            } else {
                z * ((m + c) / m)
            }
        });
        let shifted = SpectrumStats::from_mean(shifted, 1).unwrap();
        let d = spectral_difference(&shifted, &base).unwrap();
        assert!((d - c * c).abs() <= 1e-9, "got {d}");
    }

    #[test]
    fn rejects_empty_sets_and_mismatched_shapes() {
        assert!(matches!(
            mean_spectrum(&[], 8, 8),
            Err(Error::EmptySet { .. })
        ));
        let f = synth::uniform_field(8, 8, 11);
        assert!(matches!(
            mean_spectrum(std::slice::from_ref(&f), 16, 16),
            Err(Error::ShapeMismatch { .. })
        ));
        let a = mean_spectrum(&[synth::uniform_field(8, 8, 1)], 8, 8).unwrap();
        let b = mean_spectrum(&[synth::uniform_field(16, 16, 1)], 16, 16).unwrap();
        assert!(matches!(
            spectral_difference(&a, &b),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn luma_weights() {
        let mk = |r: f64, g: f64, b: f64| {
            MultiChannelField::new(
                [
                    Array2::from_elem((2, 2), r),
                    Array2::from_elem((2, 2), g),
                    Array2::from_elem((2, 2), b),
                ],
                ValueRange::Unit,
            )
            .unwrap()
        };
        // The three weights sum to 1 up to one rounding step.
        assert!((color_to_scalar(&mk(1.0, 1.0, 1.0))[(0, 0)] - 1.0).abs() < 1e-15);
        assert_eq!(color_to_scalar(&mk(1.0, 0.0, 0.0))[(0, 0)], 0.299);
        assert_eq!(color_to_scalar(&mk(0.0, 1.0, 0.0))[(0, 0)], 0.587);
        assert_eq!(color_to_scalar(&mk(0.0, 0.0, 1.0))[(0, 0)], 0.114);
        // Equal channels reduce to the channel value.
        let g = synth::uniform_field(4, 4, 12);
        let eq = MultiChannelField::new(
            [
                g.values().clone(),
                g.values().clone(),
                g.values().clone(),
            ],
            ValueRange::Unit,
        )
        .unwrap();
        let luma = color_to_scalar(&eq);
        for (a, b) in luma.values().iter().zip(g.values().iter()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn pairwise_reduction_is_order_stable() {
        // Same set, different image order: means agree to pairwise-sum
        // accuracy.
        let images: Vec<ScalarField> =
            (0..7).map(|s| synth::uniform_field(8, 8, 90 + s)).collect();
        let forward = mean_spectrum(&images, 8, 8).unwrap();
        let mut rev = images.clone();
        rev.reverse();
        let backward = mean_spectrum(&rev, 8, 8).unwrap();
        assert!(max_complex_diff(forward.mean_spectrum(), backward.mean_spectrum()) <= 1e-12);
    }
}
