//! Training-loss calculus over maps, feature vectors, and externally
//! supplied adversarial scalars.
//!
//! Everything here is a pure function: L1 means over equally shaped
//! inputs, block one-hot age codes, the per-branch weighted sums, and a
//! serializable itemized report whose total provably recomputes from its
//! parts. Adversarial terms enter as plain numbers; no network runs here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries per age-group block in an age code.
pub const AGE_CODE_BLOCK: usize = 50;

/// Term weights. Defaults are the published training configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossWeights {
    pub lambda_rec: f64,
    pub lambda_cyc: f64,
    pub lambda_id: f64,
    pub lambda_age: f64,
    pub lambda_emd: f64,
    pub lambda_s: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_rec: 10.0,
            lambda_cyc: 10.0,
            lambda_id: 1.0,
            lambda_age: 1.0,
            lambda_emd: 0.3,
            lambda_s: 0.3,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lambda_rec", self.lambda_rec),
            ("lambda_cyc", self.lambda_cyc),
            ("lambda_id", self.lambda_id),
            ("lambda_age", self.lambda_age),
            ("lambda_emd", self.lambda_emd),
            ("lambda_s", self.lambda_s),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Block one-hot age conditioning vector: `AGE_CODE_BLOCK` entries per
/// group, all-ones in the chosen group's block, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct AgeCode {
    values: Vec<f64>,
    group: usize,
    n_groups: usize,
}

/// Builds the code for `group` (1-based) out of `n_groups`.
pub fn age_code(group: usize, n_groups: usize) -> Result<AgeCode> {
    if n_groups == 0 || group == 0 || group > n_groups {
        return Err(Error::GroupOutOfRange { group, n_groups });
    }
    let mut values = vec![0.0; AGE_CODE_BLOCK * n_groups];
    let start = (group - 1) * AGE_CODE_BLOCK;
    for v in &mut values[start..start + AGE_CODE_BLOCK] {
        *v = 1.0;
    }
    Ok(AgeCode {
        values,
        group,
        n_groups,
    })
}

impl AgeCode {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn group(&self) -> usize {
        self.group
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Mean absolute difference over all entries.
pub fn l1_mean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch {
            left: format!("{} entries", a.len()),
            right: format!("{} entries", b.len()),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptySet {
            context: "l1_mean over zero entries".into(),
        });
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum / a.len() as f64)
}

/// Mean absolute difference over the entries `mask` marks valid.
pub fn l1_mean_masked(a: &[f64], b: &[f64], mask: &[bool]) -> Result<f64> {
    if a.len() != b.len() || a.len() != mask.len() {
        return Err(Error::ShapeMismatch {
            left: format!("{} entries", a.len()),
            right: format!("{} entries / {} mask", b.len(), mask.len()),
        });
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for ((x, y), &keep) in a.iter().zip(b).zip(mask) {
        if keep {
            sum += (x - y).abs();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptySet {
            context: "l1_mean_masked with no valid entries".into(),
        });
    }
    Ok(sum / n as f64)
}

/// Generated-should-equal-source term; plain L1 mean.
pub fn reconstruction_loss(y_src: &[f64], x: &[f64]) -> Result<f64> {
    l1_mean(y_src, x)
}

/// Round-trip term; plain L1 mean.
pub fn cycle_loss(y_cyc: &[f64], x: &[f64]) -> Result<f64> {
    l1_mean(y_cyc, x)
}

/// Identity-feature preservation term; plain L1 mean over encoder
/// outputs.
pub fn identity_loss(f_x: &[f64], f_y: &[f64]) -> Result<f64> {
    l1_mean(f_x, f_y)
}

/// Age conditioning term: the generated image's age features should
/// match the target code, and the real image's features its source code.
pub fn age_loss(e_gen: &[f64], z_tgt: &AgeCode, e_real: &[f64], z_src: &AgeCode) -> Result<f64> {
    Ok(l1_mean(e_gen, z_tgt.values())? + l1_mean(e_real, z_src.values())?)
}

/// Adds the detail-component counterpart of a term: `base +
/// lambda_emd * imf_term`.
pub fn refactor_with_imf(base: f64, imf_term: f64, w: &LossWeights) -> f64 {
    base + w.lambda_emd * imf_term
}

/// Shape-branch subtotal: `lambda_rec*rec + lambda_cyc*cyc + adv`. The
/// adversarial scalar enters at unit weight.
pub fn shape_branch_loss(rec: f64, cyc: f64, adv: f64, w: &LossWeights) -> f64 {
    w.lambda_rec * rec + w.lambda_cyc * cyc + adv
}

/// Texture-branch subtotal over already-refactored primed terms:
/// `lambda_rec*rec' + lambda_cyc*cyc' + adv' + lambda_age*age +
/// lambda_id*id`.
pub fn texture_branch_loss(
    rec_refactored: f64,
    cyc_refactored: f64,
    adv_refactored: f64,
    age: f64,
    id: f64,
    w: &LossWeights,
) -> f64 {
    w.lambda_rec * rec_refactored
        + w.lambda_cyc * cyc_refactored
        + adv_refactored
        + w.lambda_age * age
        + w.lambda_id * id
}

/// Final objective: `lambda_s * l_s + l_t`.
pub fn total_loss(l_s: f64, l_t: f64, w: &LossWeights) -> f64 {
    w.lambda_s * l_s + l_t
}

/// Raw shape-branch measurements.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShapeTerms {
    pub rec: f64,
    pub cyc: f64,
    pub adv: f64,
}

/// Raw texture-branch measurements; `*_imf` are the detail-component
/// counterparts folded in by [`refactor_with_imf`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TextureTerms {
    pub rec: f64,
    pub rec_imf: f64,
    pub cyc: f64,
    pub cyc_imf: f64,
    pub adv: f64,
    pub adv_imf: f64,
    pub age: f64,
    pub id: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeBranchReport {
    pub rec: f64,
    pub cyc: f64,
    pub adv: f64,
    pub subtotal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextureBranchReport {
    pub rec: f64,
    pub rec_imf: f64,
    pub rec_refactored: f64,
    pub cyc: f64,
    pub cyc_imf: f64,
    pub cyc_refactored: f64,
    pub adv: f64,
    pub adv_imf: f64,
    pub adv_refactored: f64,
    pub age: f64,
    pub id: f64,
    pub subtotal: f64,
}

/// Itemized loss breakdown. `total` is always recomputable from the
/// parts: [`LossReport::verify`] checks bit equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub weights: LossWeights,
    pub shape: ShapeBranchReport,
    pub texture: TextureBranchReport,
    pub total: f64,
}

impl LossReport {
    /// Composes branch measurements into the full objective, in one
    /// fixed evaluation order.
    pub fn compose(shape: &ShapeTerms, texture: &TextureTerms, weights: &LossWeights) -> LossReport {
        let rec_refactored = refactor_with_imf(texture.rec, texture.rec_imf, weights);
        let cyc_refactored = refactor_with_imf(texture.cyc, texture.cyc_imf, weights);
        let adv_refactored = refactor_with_imf(texture.adv, texture.adv_imf, weights);
        let l_s = shape_branch_loss(shape.rec, shape.cyc, shape.adv, weights);
        let l_t = texture_branch_loss(
            rec_refactored,
            cyc_refactored,
            adv_refactored,
            texture.age,
            texture.id,
            weights,
        );
        LossReport {
            weights: *weights,
            shape: ShapeBranchReport {
                rec: shape.rec,
                cyc: shape.cyc,
                adv: shape.adv,
                subtotal: l_s,
            },
            texture: TextureBranchReport {
                rec: texture.rec,
                rec_imf: texture.rec_imf,
                rec_refactored,
                cyc: texture.cyc,
                cyc_imf: texture.cyc_imf,
                cyc_refactored,
                adv: texture.adv,
                adv_imf: texture.adv_imf,
                adv_refactored,
                age: texture.age,
                id: texture.id,
                subtotal: l_t,
            },
            total: total_loss(l_s, l_t, weights),
        }
    }

    /// True iff every subtotal and the total recompute exactly from the
    /// itemized terms with the stored weights.
    pub fn verify(&self) -> bool {
        let w = &self.weights;
        self.shape.subtotal == shape_branch_loss(self.shape.rec, self.shape.cyc, self.shape.adv, w)
            && self.texture.rec_refactored
                == refactor_with_imf(self.texture.rec, self.texture.rec_imf, w)
            && self.texture.cyc_refactored
                == refactor_with_imf(self.texture.cyc, self.texture.cyc_imf, w)
            && self.texture.adv_refactored
                == refactor_with_imf(self.texture.adv, self.texture.adv_imf, w)
            && self.texture.subtotal
                == texture_branch_loss(
                    self.texture.rec_refactored,
                    self.texture.cyc_refactored,
                    self.texture.adv_refactored,
                    self.texture.age,
                    self.texture.id,
                    w,
                )
            && self.total == total_loss(self.shape.subtotal, self.texture.subtotal, w)
    }
}
