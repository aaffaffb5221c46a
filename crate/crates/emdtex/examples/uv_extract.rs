// Sampling an image through UV position maps: a straight identity map,
// a sine warp with a masked hole, and a validation report for a map
// that points outside the image.

use emdtex::io::png;
use emdtex::synth;
use emdtex::texture::{extract_texture, validate_position_map, UVPositionMap};
use ndarray::Array2;

fn main() -> emdtex::Result<()> {
    let out = std::env::temp_dir().join("emdtex-uv-extract");
    std::fs::create_dir_all(&out)?;

    let image = synth::synthetic_photo(64, 64, 3);
    png::write_image_8bit(&out.join("image.png"), &image)?;

    // Identity: the texture is the image, up to bilinear interpolation
    // at integer coordinates, which is exact.
    let identity = UVPositionMap::identity(64, 64, 64, 64);
    let texture = extract_texture(&image, &identity)?;
    let err = texture.grid().max_abs_diff(&image)?;
    println!("identity map: max |texture - image| = {err:.2e}");

    // A horizontal sine warp, with a 6x6 hole masked out.
    let (uh, uw) = (48usize, 48usize);
    let x = Array2::from_shape_fn((uh, uw), |(i, j)| {
        let base = j as f64 * 63.0 / (uw - 1) as f64;
        let wiggle = 3.0 * (i as f64 / 8.0).sin();
        (base + wiggle).clamp(0.0, 63.0)
    });
    let y = Array2::from_shape_fn((uh, uw), |(i, _)| i as f64 * 63.0 / (uh - 1) as f64);
    let mut mask = Array2::from_elem((uh, uw), true);
    for i in 20..26 {
        for j in 20..26 {
            mask[(i, j)] = false;
        }
    }
    let warped = UVPositionMap::new(x, y, Array2::zeros((uh, uw)), mask)?;
    let report = validate_position_map(&warped, (64, 64));
    println!("warped map: {report}");
    let texture = extract_texture(&image, &warped)?;
    png::write_image_8bit(&out.join("warped.png"), texture.grid())?;
    png::write_mask(&out.join("warped_mask.png"), texture.mask())?;
    println!(
        "warped texture: {} of {} texels valid -> {}",
        texture.mask().iter().filter(|&&b| b).count(),
        uh * uw,
        out.join("warped.png").display()
    );

    // Broken map: one coordinate beyond the image, one NaN.
    let mut bad = UVPositionMap::identity(8, 8, 64, 64);
    let mut x = bad.x().clone();
    x[(0, 0)] = 99.0;
    x[(1, 1)] = f64::NAN;
    bad = UVPositionMap::new(x, bad.y().clone(), bad.z().clone(), bad.mask().clone())?;
    println!("broken map: {}", validate_position_map(&bad, (64, 64)));
    Ok(())
}
