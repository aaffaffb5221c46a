//! Directory bundles: a `meta.json` manifest plus raw binary planes.
//!
//! Planes are little-endian `f32`, row-major, one file per plane; masks
//! are one byte per texel (0 or 1). The manifest records dimensions,
//! kind-specific provenance, and a SHA-256 digest with byte count for
//! every component file, so readers detect truncation and corruption.
//! Bundles are written to a temp directory and renamed into place.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::bemd::{BemdConfig, DecompMeta, Decomposition2d, Normalization, TextureDecomposition};
use crate::digest::sha256_hex;
use crate::error::{Error, Result};
use crate::field::{MultiChannelField, ScalarField, ValueRange};
use crate::io::staging_parent;
use crate::spectral::SpectrumStats;
use crate::texture::UVPositionMap;

/// Manifest format revision.
pub const SCHEMA_VERSION: u32 = 1;

/// Manifest file name inside every bundle directory.
pub const MANIFEST_NAME: &str = "meta.json";

const CHANNEL_NAMES: [&str; 3] = ["r", "g", "b"];

/// One file in a bundle, with its integrity digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentFile {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Kind-specific manifest fields. The `kind` tag selects the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BundleKind {
    /// Per-channel multi-scale decomposition of an RGB texture.
    Decomposition {
        n_bimfs_requested: usize,
        /// Windows actually used, one inner list per channel (r, g, b).
        window_sizes: Vec<Vec<usize>>,
        normalization: Normalization,
        /// Digest of the original [0, 1] texture grid.
        source_hash: String,
        /// Digests of the per-channel fields the decomposer consumed.
        channel_source_hashes: Vec<String>,
        config: BemdConfig,
    },
    /// UV-space positions (x, y, z planes) with a validity mask.
    PositionMap,
    /// Mean 2D spectrum over an image set.
    Spectrum { n_images: usize },
    /// Plain float RGB image.
    Image { range: ValueRange },
}

/// Bundle manifest: schema revision, plane dimensions, kind fields, and
/// the component list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub schema_version: u32,
    pub height: usize,
    pub width: usize,
    #[serde(flatten)]
    pub kind: BundleKind,
    pub components: Vec<ComponentFile>,
}

fn encode_plane(a: &Array2<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(a.len() * 4);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out.extend_from_slice(&(a[(i, j)] as f32).to_le_bytes());
        }
    }
    out
}

fn decode_plane(bytes: &[u8], height: usize, width: usize, name: &str) -> Result<Array2<f64>> {
    if bytes.len() != height * width * 4 {
        return Err(Error::InvalidBundle(format!(
            "{name}: expected {} bytes for {height}x{width} f32 plane, found {}",
            height * width * 4,
            bytes.len()
        )));
    }
    let mut a = Array2::zeros((height, width));
    for (idx, chunk) in bytes.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("chunk of 4")) as f64;
        if !v.is_finite() {
            return Err(Error::InvalidBundle(format!(
                "{name}: non-finite value {v} at entry {idx}"
            )));
        }
        a[(idx / width, idx % width)] = v;
    }
    Ok(a)
}

fn encode_mask(mask: &Array2<bool>) -> Vec<u8> {
    let mut out = Vec::with_capacity(mask.len());
    for i in 0..mask.nrows() {
        for j in 0..mask.ncols() {
            out.push(mask[(i, j)] as u8);
        }
    }
    out
}

fn decode_mask(bytes: &[u8], height: usize, width: usize, name: &str) -> Result<Array2<bool>> {
    if bytes.len() != height * width {
        return Err(Error::InvalidBundle(format!(
            "{name}: expected {} bytes for {height}x{width} mask, found {}",
            height * width,
            bytes.len()
        )));
    }
    let mut mask = Array2::from_elem((height, width), false);
    for (idx, &b) in bytes.iter().enumerate() {
        mask[(idx / width, idx % width)] = match b {
            0 => false,
            1 => true,
            other => {
                return Err(Error::InvalidBundle(format!(
                    "{name}: mask byte {other} at entry {idx}, expected 0 or 1"
                )))
            }
        };
    }
    Ok(mask)
}

/// Assembles the manifest and writes all files into a temp directory,
/// then renames it over `dir`. An existing bundle at `dir` is replaced;
/// any other existing path is refused.
fn write_bundle(
    dir: &Path,
    height: usize,
    width: usize,
    kind: BundleKind,
    files: Vec<(String, Vec<u8>)>,
) -> Result<BundleManifest> {
    let components = files
        .iter()
        .map(|(name, bytes)| ComponentFile {
            file: name.clone(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        })
        .collect();
    let manifest = BundleManifest {
        schema_version: SCHEMA_VERSION,
        height,
        width,
        kind,
        components,
    };

    let staging = tempfile::Builder::new()
        .prefix(".bundle-")
        .tempdir_in(staging_parent(dir))?;
    for (name, bytes) in &files {
        fs::write(staging.path().join(name), bytes)?;
    }
    let mut meta = serde_json::to_vec_pretty(&manifest)?;
    meta.push(b'\n');
    fs::write(staging.path().join(MANIFEST_NAME), &meta)?;

    if dir.exists() {
        if dir.join(MANIFEST_NAME).is_file() {
            fs::remove_dir_all(dir)?;
        } else {
            return Err(Error::InvalidInput(format!(
                "{} exists and is not a bundle; refusing to overwrite",
                dir.display()
            )));
        }
    }
    let staged = staging.keep();
    if let Err(e) = fs::rename(&staged, dir) {
        let _ = fs::remove_dir_all(&staged);
        return Err(e.into());
    }
    Ok(manifest)
}

/// Reads and parses `meta.json`, checking the schema revision.
pub fn read_manifest(dir: &Path) -> Result<BundleManifest> {
    let meta_path = dir.join(MANIFEST_NAME);
    if !meta_path.is_file() {
        return Err(Error::InvalidInput(format!(
            "{} is not a bundle (no {MANIFEST_NAME})",
            dir.display()
        )));
    }
    let manifest: BundleManifest = serde_json::from_slice(&fs::read(&meta_path)?)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidManifest(format!(
            "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
            manifest.schema_version
        )));
    }
    Ok(manifest)
}

fn find_component<'a>(manifest: &'a BundleManifest, name: &str) -> Result<&'a ComponentFile> {
    manifest
        .components
        .iter()
        .find(|c| c.file == name)
        .ok_or_else(|| Error::InvalidManifest(format!("manifest lists no component {name}")))
}

/// Reads one component's bytes, enforcing the recorded length and digest.
fn read_component(dir: &Path, comp: &ComponentFile) -> Result<Vec<u8>> {
    let bytes = fs::read(dir.join(&comp.file))?;
    if bytes.len() as u64 != comp.bytes {
        return Err(Error::InvalidBundle(format!(
            "{}: expected {} bytes, found {}",
            comp.file,
            comp.bytes,
            bytes.len()
        )));
    }
    let digest = sha256_hex(&bytes);
    if digest != comp.sha256 {
        return Err(Error::InvalidBundle(format!(
            "{}: sha256 mismatch (manifest {}, file {digest})",
            comp.file, comp.sha256
        )));
    }
    Ok(bytes)
}

fn read_plane(dir: &Path, manifest: &BundleManifest, name: &str) -> Result<Array2<f64>> {
    let comp = find_component(manifest, name)?;
    let bytes = read_component(dir, comp)?;
    decode_plane(&bytes, manifest.height, manifest.width, name)
}

/// Checks every listed component against its recorded digest and length.
pub fn verify_bundle(dir: &Path) -> Result<BundleManifest> {
    let manifest = read_manifest(dir)?;
    for comp in &manifest.components {
        read_component(dir, comp)?;
    }
    Ok(manifest)
}

fn bimf_file(k: usize, channel: usize) -> String {
    format!("bimf_{k}_{}.f32", CHANNEL_NAMES[channel])
}

fn residue_file(channel: usize) -> String {
    format!("residue_{}.f32", CHANNEL_NAMES[channel])
}

/// Writes a texture decomposition: one plane per BIMF per channel plus
/// the per-channel residues.
pub fn write_texture_decomposition(
    dir: &Path,
    d: &TextureDecomposition,
    config: &BemdConfig,
) -> Result<BundleManifest> {
    let (h, w) = (d.residue.height(), d.residue.width());
    let mut files = Vec::new();
    for (ch, dec) in d.channels.iter().enumerate() {
        for (k, bimf) in dec.bimfs.iter().enumerate() {
            files.push((bimf_file(k, ch), encode_plane(bimf.values())));
        }
        files.push((residue_file(ch), encode_plane(dec.residue.values())));
    }
    let kind = BundleKind::Decomposition {
        n_bimfs_requested: d.channels[0].meta.n_bimfs_requested,
        window_sizes: d.channels.iter().map(|c| c.meta.window_sizes.clone()).collect(),
        normalization: d.channels[0].meta.normalization,
        source_hash: d.source_hash.clone(),
        channel_source_hashes: d.channels.iter().map(|c| c.meta.source_hash.clone()).collect(),
        config: config.clone(),
    };
    write_bundle(dir, h, w, kind, files)
}

/// Reads a decomposition bundle back into memory, recomputing the
/// aggregate detail and trend fields from the stored planes.
pub fn read_texture_decomposition(dir: &Path) -> Result<(TextureDecomposition, BundleManifest)> {
    let manifest = read_manifest(dir)?;
    let BundleKind::Decomposition {
        n_bimfs_requested,
        ref window_sizes,
        normalization,
        ref source_hash,
        ref channel_source_hashes,
        ..
    } = manifest.kind
    else {
        return Err(Error::InvalidManifest(format!(
            "expected a decomposition bundle in {}",
            dir.display()
        )));
    };
    if window_sizes.len() != 3 || channel_source_hashes.len() != 3 {
        return Err(Error::InvalidManifest(
            "decomposition manifests carry exactly 3 channels".into(),
        ));
    }

    let mut channels = Vec::with_capacity(3);
    for ch in 0..3 {
        let mut bimfs = Vec::with_capacity(window_sizes[ch].len());
        for k in 0..window_sizes[ch].len() {
            let plane = read_plane(dir, &manifest, &bimf_file(k, ch))?;
            bimfs.push(ScalarField::from_array_unchecked(plane));
        }
        let residue = ScalarField::from_array_unchecked(read_plane(dir, &manifest, &residue_file(ch))?);
        channels.push(Decomposition2d {
            bimfs,
            residue,
            meta: DecompMeta {
                n_bimfs_requested,
                window_sizes: window_sizes[ch].clone(),
                normalization,
                source_hash: channel_source_hashes[ch].clone(),
            },
        });
    }
    let channels: [Decomposition2d; 3] = channels.try_into().expect("exactly 3 channels");

    let residue_range = match normalization {
        Normalization::SymmetricUnit => ValueRange::SymmetricUnit,
        Normalization::None => ValueRange::Unbounded,
    };
    let sigma_c = MultiChannelField::new(
        std::array::from_fn(|ch| channels[ch].sigma_c().values().clone()),
        ValueRange::Unbounded,
    )?;
    let residue = MultiChannelField::new(
        std::array::from_fn(|ch| channels[ch].residue.values().clone()),
        residue_range,
    )?;

    Ok((
        TextureDecomposition {
            channels,
            sigma_c,
            residue,
            source_hash: source_hash.clone(),
        },
        manifest,
    ))
}

/// Writes a position map: x, y, z planes plus the validity mask.
pub fn write_position_map(dir: &Path, p: &UVPositionMap) -> Result<BundleManifest> {
    let files = vec![
        ("position_x.f32".to_string(), encode_plane(p.x())),
        ("position_y.f32".to_string(), encode_plane(p.y())),
        ("position_z.f32".to_string(), encode_plane(p.z())),
        ("mask.u8".to_string(), encode_mask(p.mask())),
    ];
    write_bundle(dir, p.height(), p.width(), BundleKind::PositionMap, files)
}

pub fn read_position_map(dir: &Path) -> Result<(UVPositionMap, BundleManifest)> {
    let manifest = read_manifest(dir)?;
    if !matches!(manifest.kind, BundleKind::PositionMap) {
        return Err(Error::InvalidManifest(format!(
            "expected a position_map bundle in {}",
            dir.display()
        )));
    }
    let x = read_plane(dir, &manifest, "position_x.f32")?;
    let y = read_plane(dir, &manifest, "position_y.f32")?;
    let z = read_plane(dir, &manifest, "position_z.f32")?;
    let comp = find_component(&manifest, "mask.u8")?;
    let mask = decode_mask(
        &read_component(dir, comp)?,
        manifest.height,
        manifest.width,
        "mask.u8",
    )?;
    Ok((UVPositionMap::new(x, y, z, mask)?, manifest))
}

/// Writes spectrum statistics: real and imaginary mean planes plus the
/// derived magnitude plane.
pub fn write_spectrum(dir: &Path, s: &SpectrumStats) -> Result<BundleManifest> {
    let (h, w) = s.dims();
    let real = Array2::from_shape_fn((h, w), |ij| s.mean_spectrum()[ij].re);
    let imag = Array2::from_shape_fn((h, w), |ij| s.mean_spectrum()[ij].im);
    let files = vec![
        ("mean_real.f32".to_string(), encode_plane(&real)),
        ("mean_imag.f32".to_string(), encode_plane(&imag)),
        ("magnitude.f32".to_string(), encode_plane(s.magnitude())),
    ];
    write_bundle(
        dir,
        h,
        w,
        BundleKind::Spectrum {
            n_images: s.n_images(),
        },
        files,
    )
}

/// Reads spectrum statistics, rebuilding the magnitude from the mean
/// planes and cross-checking it against the stored copy.
pub fn read_spectrum(dir: &Path) -> Result<(SpectrumStats, BundleManifest)> {
    let manifest = read_manifest(dir)?;
    let BundleKind::Spectrum { n_images } = manifest.kind else {
        return Err(Error::InvalidManifest(format!(
            "expected a spectrum bundle in {}",
            dir.display()
        )));
    };
    let real = read_plane(dir, &manifest, "mean_real.f32")?;
    let imag = read_plane(dir, &manifest, "mean_imag.f32")?;
    let stored_magnitude = read_plane(dir, &manifest, "magnitude.f32")?;
    let mean = Array2::from_shape_fn(real.dim(), |ij| Complex::new(real[ij], imag[ij]));
    let stats = SpectrumStats::from_mean(mean, n_images)?;
    // The stored plane is redundant; it must agree with the mean up to
    // the f32 quantization both sides went through.
    for (ij, &stored) in stored_magnitude.indexed_iter() {
        let fresh = stats.magnitude()[ij];
        let tol = 1e-5 * fresh.abs().max(1.0);
        if (stored - fresh).abs() > tol {
            return Err(Error::InvalidBundle(format!(
                "magnitude.f32 disagrees with mean planes at {ij:?}: stored {stored}, recomputed {fresh}"
            )));
        }
    }
    Ok((stats, manifest))
}

/// Writes a float RGB image bundle.
pub fn write_image_bundle(dir: &Path, image: &MultiChannelField) -> Result<BundleManifest> {
    let files = (0..3)
        .map(|ch| {
            (
                format!("plane_{}.f32", CHANNEL_NAMES[ch]),
                encode_plane(image.channel(ch)),
            )
        })
        .collect();
    write_bundle(
        dir,
        image.height(),
        image.width(),
        BundleKind::Image {
            range: image.range(),
        },
        files,
    )
}

pub fn read_image_bundle(dir: &Path) -> Result<(MultiChannelField, BundleManifest)> {
    let manifest = read_manifest(dir)?;
    let BundleKind::Image { range } = manifest.kind else {
        return Err(Error::InvalidManifest(format!(
            "expected an image bundle in {}",
            dir.display()
        )));
    };
    let mut planes = Vec::with_capacity(3);
    for name in CHANNEL_NAMES {
        planes.push(read_plane(dir, &manifest, &format!("plane_{name}.f32"))?);
    }
    let channels: [Array2<f64>; 3] = planes.try_into().expect("exactly 3 planes");
    Ok((MultiChannelField::new(channels, range)?, manifest))
}
