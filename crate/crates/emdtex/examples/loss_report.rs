// Composing the training objective two ways: directly from measured
// scalars, and through a JSON manifest whose terms point at files.

use emdtex::io::{loss_manifest, png};
use emdtex::losses::{LossReport, LossWeights, ShapeTerms, TextureTerms};
use emdtex::synth;

fn main() -> emdtex::Result<()> {
    // In-memory composition from already-measured terms.
    let weights = LossWeights::default();
    let report = LossReport::compose(
        &ShapeTerms {
            rec: 0.12,
            cyc: 0.08,
            adv: 0.65,
        },
        &TextureTerms {
            rec: 0.21,
            rec_imf: 0.05,
            cyc: 0.14,
            cyc_imf: 0.03,
            adv: 0.7,
            adv_imf: 0.4,
            age: 0.5,
            id: 0.02,
        },
        &weights,
    );
    println!("shape subtotal:   {:.4}", report.shape.subtotal);
    println!("texture subtotal: {:.4}", report.texture.subtotal);
    println!("total:            {:.4}", report.total);
    assert!(report.verify());

    // The same machinery driven by a manifest: scalar terms inline,
    // image terms as file pairs, the age term from feature vectors.
    let dir = std::env::temp_dir().join("emdtex-loss-report");
    std::fs::create_dir_all(&dir)?;
    png::write_image_8bit(&dir.join("gen.png"), &synth::synthetic_photo(32, 32, 1))?;
    png::write_image_8bit(&dir.join("tgt.png"), &synth::synthetic_photo(32, 32, 2))?;
    let features: Vec<f64> = (0..300).map(|k| (k as f64 / 300.0).sin()).collect();
    std::fs::write(dir.join("e_gen.json"), serde_json::to_vec(&features)?)?;
    std::fs::write(dir.join("e_real.json"), serde_json::to_vec(&features)?)?;

    let manifest = serde_json::json!({
        "shape": { "rec": 0.12, "cyc": 0.08, "adv": 0.65 },
        "texture": {
            "rec": { "generated": "gen.png", "target": "tgt.png" },
            "rec_imf": 0.05,
            "cyc": 0.14,
            "adv": 0.7,
            "age": {
                "generated_features": "e_gen.json",
                "target_group": 3,
                "real_features": "e_real.json",
                "source_group": 1
            },
            "id": 0.02
        }
    });
    let path = dir.join("losses.json");
    std::fs::write(&path, manifest.to_string())?;

    let from_files = loss_manifest::evaluate_file(&path, None)?;
    println!(
        "manifest total:   {:.4} (image rec term {:.4}, age term {:.4})",
        from_files.total, from_files.texture.rec, from_files.texture.age
    );
    Ok(())
}
