// Splitting a two-tone signal into intrinsic mode functions. The fast
// tone comes out first, the slow tone second, and the residue carries
// whatever trend is left.

use emdtex::emd1d::{decompose, zero_crossings, SiftConfig};
use emdtex::synth;

fn main() -> emdtex::Result<()> {
    let n = 1024;
    let signal = synth::multi_tone(&[32.0, 4.0], n);
    let d = decompose(&signal, &SiftConfig::default())?;

    println!("{n} samples -> {} IMF(s) + residue", d.imfs.len());
    for (k, imf) in d.imfs.iter().enumerate() {
        let peak = imf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!(
            "  imf {}: {:3} zero crossings, peak amplitude {:.3}",
            k + 1,
            zero_crossings(imf),
            peak
        );
    }
    let drift = d.residue.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("  residue: peak |v| = {drift:.2e}");

    let err = d
        .reconstruct()
        .iter()
        .zip(&signal)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("max reconstruction error: {err:.2e}");
    Ok(())
}
