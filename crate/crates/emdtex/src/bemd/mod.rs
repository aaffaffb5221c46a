//! Fast and adaptive bidimensional empirical mode decomposition.
//!
//! A field is split into bidimensional IMFs (BIMFs) by order-statistics
//! filtering: envelope surfaces come from sliding max/min filters whose
//! window width adapts to the spacing of local extrema, optionally
//! smoothed by a mean filter of the same width. One sifting iteration is
//! performed per BIMF; the envelope mean becomes the remainder for the
//! next stage, so components always sum back to the input. Texture maps
//! are mapped to [-1, 1] and decomposed channel by channel.

pub mod extrema;
pub mod filters;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::digest;
use crate::error::{Error, Result};
use crate::field::{MultiChannelField, ScalarField, ValueRange};
use crate::texture::TextureMap;

pub use extrema::{local_extrema_2d, window_size};
pub use filters::{box_mean, sliding_max, sliding_min};

/// How the envelope window width is derived from extrema spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowRule {
    /// Smallest nearest-neighbor distance over both extrema sets.
    MinAdjacentExtremaDistance,
    /// Largest nearest-neighbor distance over both extrema sets.
    MaxAdjacentExtremaDistance,
}

/// Decomposition controls.
///
/// `window_override` pins the window width per BIMF (each entry odd,
/// at least 3, one entry per requested BIMF) instead of deriving widths
/// from the data; shift-covariance comparisons need this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BemdConfig {
    pub n_bimfs: usize,
    pub window_rule: WindowRule,
    pub smoothing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_override: Option<Vec<usize>>,
}

impl Default for BemdConfig {
    fn default() -> Self {
        BemdConfig {
            n_bimfs: 3,
            window_rule: WindowRule::MinAdjacentExtremaDistance,
            smoothing: true,
            window_override: None,
        }
    }
}

impl BemdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_bimfs == 0 {
            return Err(Error::InvalidConfig("n_bimfs must be at least 1".into()));
        }
        if let Some(ws) = &self.window_override {
            if ws.len() != self.n_bimfs {
                return Err(Error::InvalidConfig(format!(
                    "window_override has {} entries but n_bimfs is {}",
                    ws.len(),
                    self.n_bimfs
                )));
            }
            for &w in ws {
                if w < 3 || w % 2 == 0 {
                    return Err(Error::BadWindow { window: w });
                }
            }
        }
        Ok(())
    }
}

/// Which value mapping was applied to the decomposed data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    None,
    /// Input was affinely mapped from [0, 1] to [-1, 1] first.
    SymmetricUnit,
}

/// Decomposition provenance: what was asked for, which windows were
/// used (one per extracted BIMF, non-decreasing), how values were
/// normalized, and a digest of the source field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompMeta {
    pub n_bimfs_requested: usize,
    pub window_sizes: Vec<usize>,
    pub normalization: Normalization,
    pub source_hash: String,
}

/// BIMFs ordered fine-to-coarse plus the residue trend.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition2d {
    pub bimfs: Vec<ScalarField>,
    pub residue: ScalarField,
    pub meta: DecompMeta,
}

impl Decomposition2d {
    /// Sum of all BIMFs plus the residue.
    pub fn reconstruct(&self) -> ScalarField {
        let mut acc = self.residue.values().clone();
        for bimf in &self.bimfs {
            acc += bimf.values();
        }
        ScalarField::from_array_unchecked(acc)
    }

    /// Sum of the BIMFs alone (zeros when the input had no oscillation).
    pub fn sigma_c(&self) -> ScalarField {
        let dim = self.residue.values().dim();
        let mut acc = Array2::zeros(dim);
        for bimf in &self.bimfs {
            acc += bimf.values();
        }
        ScalarField::from_array_unchecked(acc)
    }
}

/// Strict-extrema counts (maxima, minima); the density summary used in
/// frequency-ordering checks and CLI output.
pub fn strict_extrema_count(f: &ScalarField) -> Result<(usize, usize)> {
    let (maxima, minima) = local_extrema_2d(f)?;
    Ok((
        maxima.iter().filter(|&&b| b).count(),
        minima.iter().filter(|&&b| b).count(),
    ))
}

/// Envelope surfaces by order-statistics filtering: sliding max and min
/// with the w×w window, each mean-filtered with the same window when
/// `smoothing` is set. The raw max (min) filter output dominates (is
/// dominated by) the input pointwise; smoothing may break that and is
/// not asserted.
pub fn os_filter_envelopes(
    f: &ScalarField,
    w: usize,
    smoothing: bool,
) -> Result<(ScalarField, ScalarField)> {
    let upper = sliding_max(f.values(), w)?;
    let lower = sliding_min(f.values(), w)?;
    for ((u, v), l) in upper.iter().zip(f.values().iter()).zip(lower.iter()) {
        assert!(
            l <= v && v <= u,
            "order-statistics envelope must bracket the input"
        );
    }
    let (upper, lower) = if smoothing {
        (box_mean(&upper, w)?, box_mean(&lower, w)?)
    } else {
        (upper, lower)
    };
    Ok((
        ScalarField::from_array_unchecked(upper),
        ScalarField::from_array_unchecked(lower),
    ))
}

fn extract_with_window(
    f: &ScalarField,
    w: usize,
    smoothing: bool,
) -> Result<(ScalarField, ScalarField)> {
    let (upper, lower) = os_filter_envelopes(f, w, smoothing)?;
    let mut mean = upper.into_values();
    mean.zip_mut_with(lower.values(), |u, &l| *u = 0.5 * (*u + l));
    let mut bimf = f.values().clone();
    bimf.zip_mut_with(&mean, |b, &m| *b -= m);
    Ok((
        ScalarField::from_array_unchecked(bimf),
        ScalarField::from_array_unchecked(mean),
    ))
}

/// One sifting step: `bimf = f - mean_envelope`, remainder = the mean
/// envelope, so `f = bimf + remainder` by construction. The window comes
/// from `cfg.window_override` (first entry) when pinned, otherwise from
/// [`window_size`] over the field's extrema.
pub fn extract_bimf(f: &ScalarField, cfg: &BemdConfig) -> Result<(ScalarField, ScalarField, usize)> {
    cfg.validate()?;
    let (maxima, minima) = local_extrema_2d(f)?;
    let w = match &cfg.window_override {
        Some(ws) => ws[0],
        None => window_size(&maxima, &minima, cfg.window_rule)?,
    };
    let (bimf, remainder) = extract_with_window(f, w, cfg.smoothing)?;
    Ok((bimf, remainder, w))
}

/// Full decomposition: up to `cfg.n_bimfs` BIMFs, stopping early when the
/// remainder loses oscillation (fewer than 2 maxima or minima). Window
/// widths are recorded in the metadata and clamped non-decreasing so
/// later BIMFs are always coarser.
pub fn decompose_2d(f: &ScalarField, cfg: &BemdConfig) -> Result<Decomposition2d> {
    cfg.validate()?;
    let (h, w) = (f.height(), f.width());
    if h < 8 || w < 8 {
        return Err(Error::FieldTooSmall {
            height: h,
            width: w,
            min: 8,
        });
    }
    let source_hash = digest::digest_fields(&[f.values()]);
    let mut remainder = f.clone();
    let mut bimfs = Vec::new();
    let mut windows: Vec<usize> = Vec::new();
    for k in 0..cfg.n_bimfs {
        let (maxima, minima) = local_extrema_2d(&remainder)?;
        let n_max = maxima.iter().filter(|&&b| b).count();
        let n_min = minima.iter().filter(|&&b| b).count();
        if n_max < 2 || n_min < 2 {
            break;
        }
        let mut win = match &cfg.window_override {
            Some(ws) => ws[k],
            None => window_size(&maxima, &minima, cfg.window_rule)?,
        };
        if let Some(&prev) = windows.last() {
            win = win.max(prev);
        }
        let (bimf, next) = extract_with_window(&remainder, win, cfg.smoothing)?;
        bimfs.push(bimf);
        windows.push(win);
        remainder = next;
    }
    Ok(Decomposition2d {
        bimfs,
        residue: remainder,
        meta: DecompMeta {
            n_bimfs_requested: cfg.n_bimfs,
            window_sizes: windows,
            normalization: Normalization::None,
            source_hash,
        },
    })
}

/// Per-channel texture decomposition plus the aggregates used by fusion.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureDecomposition {
    /// Channel order r, g, b; inputs mapped to [-1, 1] before decomposing.
    pub channels: [Decomposition2d; 3],
    /// Per-channel sum of BIMFs (the detail aggregate).
    pub sigma_c: MultiChannelField,
    /// Per-channel residue (the trend aggregate).
    pub residue: MultiChannelField,
    /// Digest of the original [0, 1] texture grid.
    pub source_hash: String,
}

impl TextureDecomposition {
    /// `alpha`-weighted recombination in the normalized domain:
    /// `alpha * sigma_c + residue`.
    pub fn fuse(&self, alpha: f64) -> Result<MultiChannelField> {
        crate::texture::fuse(&crate::texture::FusionInput {
            sigma_c: &self.sigma_c,
            residue: &self.residue,
            alpha,
        })
    }

    /// Full recombination mapped back to [0, 1] storage.
    pub fn reconstruct_unit(&self) -> Result<MultiChannelField> {
        self.fuse(1.0)?.map(ValueRange::Unit, |v| (v + 1.0) / 2.0)
    }
}

/// Decomposes each RGB channel independently after mapping the [0, 1]
/// texture to [-1, 1]. The validity mask plays no role here; every texel
/// is decomposed.
pub fn decompose_texture(t: &TextureMap, cfg: &BemdConfig) -> Result<TextureDecomposition> {
    cfg.validate()?;
    let source_hash = digest::digest_fields(&[
        t.grid().channel(0),
        t.grid().channel(1),
        t.grid().channel(2),
    ]);
    let normalized: Vec<ScalarField> = (0..3)
        .map(|c| ScalarField::from_array_unchecked(t.grid().channel(c).mapv(|v| v * 2.0 - 1.0)))
        .collect();
    let mut channels = Vec::with_capacity(3);
    for ch in &normalized {
        let mut d = decompose_2d(ch, cfg)?;
        d.meta.normalization = Normalization::SymmetricUnit;
        channels.push(d);
    }
    let channels: [Decomposition2d; 3] = channels.try_into().expect("three channels");
    let sigma_c = MultiChannelField::from_channels_unchecked(
        [
            channels[0].sigma_c().into_values(),
            channels[1].sigma_c().into_values(),
            channels[2].sigma_c().into_values(),
        ],
        ValueRange::Unbounded,
    );
    let residue = MultiChannelField::from_channels_unchecked(
        [
            channels[0].residue.values().clone(),
            channels[1].residue.values().clone(),
            channels[2].residue.values().clone(),
        ],
        ValueRange::SymmetricUnit,
    );
    Ok(TextureDecomposition {
        channels,
        sigma_c,
        residue,
        source_hash,
    })
}
