// Multi-scale decomposition of a photo-like test image. Writes the
// decomposition bundle plus grayscale previews of each red-channel
// component, so the fine-to-coarse progression is visible.

use emdtex::bemd::{decompose_texture, strict_extrema_count, BemdConfig};
use emdtex::io::{bundle, png};
use emdtex::synth;
use emdtex::texture::TextureMap;

fn main() -> emdtex::Result<()> {
    let out = std::env::temp_dir().join("emdtex-decompose-image");
    std::fs::create_dir_all(&out)?;

    let photo = synth::synthetic_photo(128, 128, 7);
    let texture = TextureMap::from_image(photo)?;
    let cfg = BemdConfig::default();
    let d = decompose_texture(&texture, &cfg)?;

    bundle::write_texture_decomposition(&out.join("bundle"), &d, &cfg)?;
    png::write_image_8bit(&out.join("input.png"), texture.grid())?;

    let red = &d.channels[0];
    println!("red channel, {} components:", red.bimfs.len());
    for (k, bimf) in red.bimfs.iter().enumerate() {
        let (n_max, n_min) = strict_extrema_count(bimf)?;
        println!(
            "  bimf {}: window {:2}, {} maxima / {} minima",
            k + 1,
            red.meta.window_sizes[k],
            n_max,
            n_min
        );
        png::write_gray_8bit(&out.join(format!("bimf_{}.png", k + 1)), bimf)?;
    }
    png::write_gray_8bit(&out.join("residue.png"), &red.residue)?;

    let recon = d.reconstruct_unit()?;
    let err = recon.max_abs_diff(texture.grid())?;
    println!("round trip error: {err:.2e}");
    println!("artifacts under {}", out.display());
    Ok(())
}
