//! PNG input and output.
//!
//! Images load as RGB in [0, 1]: 8-bit samples become exact multiples
//! of 1/255, 16-bit of 1/65535. Writers map stored values to display
//! units via the field's range tag, clamp, and quantize half-up.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};
use ndarray::Array2;

use crate::error::Result;
use crate::field::{MultiChannelField, ScalarField, ValueRange};
use crate::io::write_file_atomic;

/// Loads a PNG as an RGB field in [0, 1].
pub fn read_image(path: &Path) -> Result<MultiChannelField> {
    let img = image::open(path)?.to_rgb16();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut channels = [
        Array2::zeros((h, w)),
        Array2::zeros((h, w)),
        Array2::zeros((h, w)),
    ];
    for (x, y, px) in img.enumerate_pixels() {
        for (c, plane) in channels.iter_mut().enumerate() {
            plane[(y as usize, x as usize)] = px.0[c] as f64 / 65535.0;
        }
    }
    MultiChannelField::new(channels, ValueRange::Unit)
}

fn encode_png(img: DynamicImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

fn quantize(v: f64, max: f64) -> f64 {
    (v.clamp(0.0, 1.0) * max).round()
}

/// Writes an 8-bit RGB PNG, mapping stored values to [0, 1] per the
/// field's range tag and clamping anything outside.
pub fn write_image_8bit(path: &Path, image: &MultiChannelField) -> Result<()> {
    let range = image.range();
    let (h, w) = (image.height(), image.width());
    let mut buf = ImageBuffer::<Rgb<u8>, Vec<u8>>::new(w as u32, h as u32);
    for (x, y, px) in buf.enumerate_pixels_mut() {
        for c in 0..3 {
            px.0[c] = quantize(range.to_unit(image.channel(c)[(y as usize, x as usize)]), 255.0) as u8;
        }
    }
    write_file_atomic(path, &encode_png(DynamicImage::ImageRgb8(buf))?)
}

/// Writes a 16-bit RGB PNG; same mapping as [`write_image_8bit`] with
/// 65535 quantization steps.
pub fn write_image_16bit(path: &Path, image: &MultiChannelField) -> Result<()> {
    let range = image.range();
    let (h, w) = (image.height(), image.width());
    let mut buf = ImageBuffer::<Rgb<u16>, Vec<u16>>::new(w as u32, h as u32);
    for (x, y, px) in buf.enumerate_pixels_mut() {
        for c in 0..3 {
            px.0[c] =
                quantize(range.to_unit(image.channel(c)[(y as usize, x as usize)]), 65535.0) as u16;
        }
    }
    write_file_atomic(path, &encode_png(DynamicImage::ImageRgb16(buf))?)
}

/// Writes a scalar field as an 8-bit grayscale PNG, min-max normalized.
/// A constant field renders black.
pub fn write_gray_8bit(path: &Path, f: &ScalarField) -> Result<()> {
    let (lo, hi) = f.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (h, w) = (f.height(), f.width());
    let mut buf = ImageBuffer::<Luma<u8>, Vec<u8>>::new(w as u32, h as u32);
    for (x, y, px) in buf.enumerate_pixels_mut() {
        px.0[0] = quantize((f[(y as usize, x as usize)] - lo) / span, 255.0) as u8;
    }
    write_file_atomic(path, &encode_png(DynamicImage::ImageLuma8(buf))?)
}

/// Writes a validity mask as an 8-bit grayscale PNG: 255 valid, 0 not.
pub fn write_mask(path: &Path, mask: &Array2<bool>) -> Result<()> {
    let (h, w) = mask.dim();
    let mut buf = ImageBuffer::<Luma<u8>, Vec<u8>>::new(w as u32, h as u32);
    for (x, y, px) in buf.enumerate_pixels_mut() {
        px.0[0] = if mask[(y as usize, x as usize)] { 255 } else { 0 };
    }
    write_file_atomic(path, &encode_png(DynamicImage::ImageLuma8(buf))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::synth;

    #[test]
    fn eight_bit_round_trip_is_exact_on_the_8bit_lattice() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        // Snap the synthetic image to the 8-bit lattice first, then the
        // write/read pair must be the identity on it.
        let img = synth::synthetic_photo(13, 17, 4)
            .map(ValueRange::Unit, |v| (v * 255.0).round() / 255.0)
            .unwrap();
        write_image_8bit(&path, &img).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.max_abs_diff(&img).unwrap(), 0.0);
    }

    #[test]
    fn sixteen_bit_write_quantizes_at_one_in_65535() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img16.png");
        let img = synth::synthetic_photo(9, 11, 8);
        write_image_16bit(&path, &img).unwrap();
        let back = read_image(&path).unwrap();
        assert!(back.max_abs_diff(&img).unwrap() <= 0.5 / 65535.0 + 1e-12);
    }

    #[test]
    fn symmetric_range_values_are_mapped_to_display_units() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sym.png");
        // Constant -1 in symmetric storage is display black; +1 is white.
        let lo = MultiChannelField::zeros(4, 4, ValueRange::SymmetricUnit)
            .map(ValueRange::SymmetricUnit, |_| -1.0)
            .unwrap();
        write_image_8bit(&path, &lo).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.channel(0)[(0, 0)], 0.0);

        let hi = lo.map(ValueRange::SymmetricUnit, |_| 1.0).unwrap();
        write_image_8bit(&path, &hi).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.channel(0)[(0, 0)], 1.0);
    }

    #[test]
    fn out_of_range_values_clamp_instead_of_wrapping() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clamp.png");
        let img = MultiChannelField::zeros(2, 2, ValueRange::Unbounded)
            .map(ValueRange::Unbounded, |_| 3.7)
            .unwrap();
        write_image_8bit(&path, &img).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.channel(0)[(0, 0)], 1.0);
    }

    #[test]
    fn truncated_png_is_an_image_error() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.png");
        write_image_8bit(&good, &synth::synthetic_photo(8, 8, 1)).unwrap();
        let bytes = std::fs::read(&good).unwrap();
        let bad = dir.path().join("bad.png");
        std::fs::write(&bad, &bytes[..bytes.len() / 2]).unwrap();
        let err = read_image(&bad).unwrap_err();
        assert!(matches!(err, Error::Image(_)));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn gray_heatmap_normalizes_to_full_scale() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gray.png");
        let f = ScalarField::from_fn(3, 3, |(i, j)| (i * 3 + j) as f64);
        write_gray_8bit(&path, &f).unwrap();
        let img = image::open(&path).unwrap().to_luma8();
        assert_eq!(img.get_pixel(0, 0).0[0], 0);
        assert_eq!(img.get_pixel(2, 2).0[0], 255);

        // Constant field must not divide by zero.
        write_gray_8bit(&path, &ScalarField::zeros(3, 3)).unwrap();
        let img = image::open(&path).unwrap().to_luma8();
        assert_eq!(img.get_pixel(1, 1).0[0], 0);
    }

    #[test]
    fn mask_png_is_binary_black_and_white() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.png");
        let mut mask = Array2::from_elem((2, 3), true);
        mask[(1, 2)] = false;
        write_mask(&path, &mask).unwrap();
        let img = image::open(&path).unwrap().to_luma8();
        assert_eq!(img.get_pixel(0, 0).0[0], 255);
        assert_eq!(img.get_pixel(2, 1).0[0], 0);
    }
}
