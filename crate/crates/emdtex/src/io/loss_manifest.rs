//! Loss-evaluation manifests: a JSON description of where each term of
//! the objective comes from, evaluated into an itemized [`LossReport`].
//!
//! Terms are either literal numbers (for quantities produced elsewhere,
//! like adversarial scores) or `{generated, target}` path pairs that the
//! evaluator loads and compares by mean absolute difference. Paths may
//! point at PNGs, directory bundles, JSON feature vectors, or CSV
//! signals, and resolve relative to the manifest's own directory.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io::bundle::{
    read_image_bundle, read_manifest, read_position_map, read_spectrum,
    read_texture_decomposition, BundleKind,
};
use crate::io::{png, signal_csv, write_file_atomic};
use crate::losses::{
    age_code, age_loss, l1_mean, l1_mean_masked, LossReport, LossWeights, ShapeTerms, TextureTerms,
};

/// A loss term: a precomputed number, or two artifacts to compare.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TermSpec {
    Value(f64),
    Pair(PairSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub generated: PathBuf,
    pub target: PathBuf,
}

/// Age term: a precomputed number, or encoder outputs to compare
/// against the block one-hot codes of the stated groups.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AgeSpec {
    Value(f64),
    Features(AgeFeatureSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgeFeatureSpec {
    pub generated_features: PathBuf,
    pub target_group: usize,
    pub real_features: PathBuf,
    pub source_group: usize,
    #[serde(default = "default_n_groups")]
    pub n_groups: usize,
}

fn default_n_groups() -> usize {
    6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSpec {
    pub rec: TermSpec,
    pub cyc: TermSpec,
    pub adv: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextureSpec {
    pub rec: TermSpec,
    #[serde(default)]
    pub rec_imf: Option<TermSpec>,
    pub cyc: TermSpec,
    #[serde(default)]
    pub cyc_imf: Option<TermSpec>,
    pub adv: f64,
    #[serde(default)]
    pub adv_imf: f64,
    pub age: AgeSpec,
    pub id: TermSpec,
}

/// Top-level manifest. Omitted weights fall back to the defaults (or a
/// caller-supplied override).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossManifest {
    #[serde(default)]
    pub weights: Option<LossWeights>,
    pub shape: ShapeSpec,
    pub texture: TextureSpec,
}

/// Flattened comparable content plus an optional validity mask.
struct Operand {
    values: Vec<f64>,
    mask: Option<Vec<bool>>,
}

fn flatten(planes: &[&Array2<f64>]) -> Vec<f64> {
    let mut out = Vec::with_capacity(planes.iter().map(|p| p.len()).sum());
    for p in planes {
        out.extend(p.iter().copied());
    }
    out
}

fn load_operand(path: &Path) -> Result<Operand> {
    if path.is_dir() {
        let manifest = read_manifest(path)?;
        return Ok(match manifest.kind {
            BundleKind::Image { .. } => {
                let (img, _) = read_image_bundle(path)?;
                Operand {
                    values: flatten(&[img.channel(0), img.channel(1), img.channel(2)]),
                    mask: None,
                }
            }
            BundleKind::Decomposition { .. } => {
                // Decompositions compare by their detail aggregate.
                let (d, _) = read_texture_decomposition(path)?;
                Operand {
                    values: flatten(&[d.sigma_c.channel(0), d.sigma_c.channel(1), d.sigma_c.channel(2)]),
                    mask: None,
                }
            }
            BundleKind::PositionMap => {
                let (p, _) = read_position_map(path)?;
                let mask: Vec<bool> = p.mask().iter().copied().collect();
                Operand {
                    values: flatten(&[p.x(), p.y(), p.z()]),
                    mask: Some(mask.repeat(3)),
                }
            }
            BundleKind::Spectrum { .. } => {
                let (s, _) = read_spectrum(path)?;
                Operand {
                    values: s.magnitude().iter().copied().collect(),
                    mask: None,
                }
            }
        });
    }
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "png" => {
            let img = png::read_image(path)?;
            Ok(Operand {
                values: flatten(&[img.channel(0), img.channel(1), img.channel(2)]),
                mask: None,
            })
        }
        "json" => Ok(Operand {
            values: read_feature_vector(path)?,
            mask: None,
        }),
        "csv" => Ok(Operand {
            values: signal_csv::read_signal(path)?,
            mask: None,
        }),
        _ => Err(Error::InvalidInput(format!(
            "{}: cannot compare a .{ext} file (use .png, .json, .csv, or a bundle directory)",
            path.display()
        ))),
    }
}

/// Loads a JSON array of numbers, e.g. encoder outputs.
pub fn read_feature_vector(path: &Path) -> Result<Vec<f64>> {
    let values: Vec<f64> = serde_json::from_slice(&std::fs::read(path)?)?;
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: format!("{}: feature value {v}", path.display()),
        });
    }
    if values.is_empty() {
        return Err(Error::EmptySet {
            context: format!("{} holds no features", path.display()),
        });
    }
    Ok(values)
}

fn compare(a: &Operand, b: &Operand) -> Result<f64> {
    match (&a.mask, &b.mask) {
        (None, None) => l1_mean(&a.values, &b.values),
        (ma, mb) => {
            if a.values.len() != b.values.len() {
                return Err(Error::ShapeMismatch {
                    left: format!("{} entries", a.values.len()),
                    right: format!("{} entries", b.values.len()),
                });
            }
            let mask: Vec<bool> = (0..a.values.len())
                .map(|i| {
                    ma.as_ref().is_none_or(|m| m[i]) && mb.as_ref().is_none_or(|m| m[i])
                })
                .collect();
            l1_mean_masked(&a.values, &b.values, &mask)
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn eval_term(spec: &TermSpec, base: &Path, name: &str) -> Result<f64> {
    match spec {
        TermSpec::Value(v) => {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("{name} term = {v}"),
                });
            }
            Ok(*v)
        }
        TermSpec::Pair(pair) => {
            let a = load_operand(&resolve(base, &pair.generated))?;
            let b = load_operand(&resolve(base, &pair.target))?;
            compare(&a, &b)
        }
    }
}

fn eval_optional(spec: &Option<TermSpec>, base: &Path, name: &str) -> Result<f64> {
    match spec {
        None => Ok(0.0),
        Some(s) => eval_term(s, base, name),
    }
}

fn eval_age(spec: &AgeSpec, base: &Path) -> Result<f64> {
    match spec {
        AgeSpec::Value(v) => {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("age term = {v}"),
                });
            }
            Ok(*v)
        }
        AgeSpec::Features(f) => {
            let e_gen = read_feature_vector(&resolve(base, &f.generated_features))?;
            let e_real = read_feature_vector(&resolve(base, &f.real_features))?;
            let z_tgt = age_code(f.target_group, f.n_groups)?;
            let z_src = age_code(f.source_group, f.n_groups)?;
            age_loss(&e_gen, &z_tgt, &e_real, &z_src)
        }
    }
}

/// Parses a manifest file.
pub fn read_loss_manifest(path: &Path) -> Result<LossManifest> {
    Ok(serde_json::from_slice(&std::fs::read(path)?)?)
}

/// Evaluates every term of `manifest`, resolving paths against `base`,
/// and composes the itemized report. `weight_override` wins over the
/// manifest's own weights.
pub fn evaluate(
    manifest: &LossManifest,
    base: &Path,
    weight_override: Option<&LossWeights>,
) -> Result<LossReport> {
    let weights = weight_override
        .or(manifest.weights.as_ref())
        .copied()
        .unwrap_or_default();
    weights.validate()?;

    let adv_terms = [
        ("shape.adv", manifest.shape.adv),
        ("texture.adv", manifest.texture.adv),
        ("texture.adv_imf", manifest.texture.adv_imf),
    ];
    for (name, v) in adv_terms {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                context: format!("{name} term = {v}"),
            });
        }
    }

    let shape = ShapeTerms {
        rec: eval_term(&manifest.shape.rec, base, "shape.rec")?,
        cyc: eval_term(&manifest.shape.cyc, base, "shape.cyc")?,
        adv: manifest.shape.adv,
    };
    let texture = TextureTerms {
        rec: eval_term(&manifest.texture.rec, base, "texture.rec")?,
        rec_imf: eval_optional(&manifest.texture.rec_imf, base, "texture.rec_imf")?,
        cyc: eval_term(&manifest.texture.cyc, base, "texture.cyc")?,
        cyc_imf: eval_optional(&manifest.texture.cyc_imf, base, "texture.cyc_imf")?,
        adv: manifest.texture.adv,
        adv_imf: manifest.texture.adv_imf,
        age: eval_age(&manifest.texture.age, base)?,
        id: eval_term(&manifest.texture.id, base, "texture.id")?,
    };
    Ok(LossReport::compose(&shape, &texture, &weights))
}

/// Parses and evaluates a manifest file in one step.
pub fn evaluate_file(path: &Path, weight_override: Option<&LossWeights>) -> Result<LossReport> {
    let manifest = read_loss_manifest(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    evaluate(&manifest, base, weight_override)
}

/// Writes a report as pretty JSON.
pub fn write_report(path: &Path, report: &LossReport) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    write_file_atomic(path, &bytes)
}
