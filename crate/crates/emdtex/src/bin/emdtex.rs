//! Command-line front end. Every subcommand is a thin shell over one
//! library entry point: parse flags, layer them over `EMDTEX_CONFIG`
//! and the built-in defaults, call the library, write the artifact.
//!
//! Exit codes: 0 success, 1 computation or validation failure, 2 usage,
//! I/O, or format errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use emdtex::bemd::{decompose_texture, strict_extrema_count, BemdConfig, WindowRule};
use emdtex::config::ToolConfig;
use emdtex::emd1d::{decompose, SiftConfig};
use emdtex::error::{Error, Result};
use emdtex::field::{ScalarField, ValueRange};
use emdtex::io::bundle::{
    read_image_bundle, read_manifest, read_position_map, read_texture_decomposition, verify_bundle,
    BundleKind, MANIFEST_NAME,
};
use emdtex::io::loss_manifest::write_report;
use emdtex::io::{bundle, png, signal_csv};
use emdtex::losses::LossWeights;
use emdtex::spectral::{color_to_scalar, mean_spectrum, spectral_difference, SpectrumStats};
use emdtex::texture::{extract_texture, TextureMap};

#[derive(Parser)]
#[command(
    name = "emdtex",
    version,
    about = "Multi-scale image decomposition, recombination, and spectral tools"
)]
struct Cli {
    /// Worker threads for batch stages (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum WindowRuleArg {
    /// Smallest nearest-neighbor distance over both extrema sets
    Min,
    /// Largest nearest-neighbor distance over both extrema sets
    Max,
}

impl From<WindowRuleArg> for WindowRule {
    fn from(v: WindowRuleArg) -> WindowRule {
        match v {
            WindowRuleArg::Min => WindowRule::MinAdjacentExtremaDistance,
            WindowRuleArg::Max => WindowRule::MaxAdjacentExtremaDistance,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Split an image into detail components (BIMFs) and a trend residue
    Decompose {
        /// Input PNG, or an image bundle directory
        input: PathBuf,
        /// Output bundle directory
        #[arg(short, long)]
        output: PathBuf,
        /// Number of detail components to extract
        #[arg(long)]
        n_bimfs: Option<usize>,
        /// Envelope window rule
        #[arg(long, value_enum)]
        window_rule: Option<WindowRuleArg>,
        /// Skip the smoothing pass over the order-statistics envelopes
        #[arg(long)]
        no_smoothing: bool,
        /// Pin window widths per component, e.g. 3,5,7 (odd, >= 3)
        #[arg(long, value_delimiter = ',')]
        window_override: Option<Vec<usize>>,
    },
    /// Recombine a decomposition bundle: alpha * detail + trend
    Fuse {
        /// Decomposition bundle directory
        bundle: PathBuf,
        /// Output PNG path (or bundle directory with --float-out)
        #[arg(short, long)]
        output: PathBuf,
        /// Detail strength (1 = full reconstruction, 0 = trend only)
        #[arg(long)]
        alpha: Option<f64>,
        /// Write exact f32 planes as an image bundle instead of a PNG
        #[arg(long)]
        float_out: bool,
    },
    /// Mean-spectrum distance between two image sets
    #[command(name = "spectral-diff")]
    SpectralDiff {
        /// Directory of PNGs, or a saved spectrum bundle
        dir_a: PathBuf,
        /// Directory of PNGs, or a saved spectrum bundle
        dir_b: PathBuf,
        /// Compare only this many images per directory, sampled without
        /// replacement (typical: 5000; default: all)
        #[arg(long)]
        sample: Option<usize>,
        /// RNG seed for sampling
        #[arg(long)]
        seed: Option<u64>,
        /// Write the per-bin squared magnitude difference as a PNG
        #[arg(long)]
        heatmap: Option<PathBuf>,
        /// Save both mean spectra as bundles under this directory
        #[arg(long)]
        save_spectra: Option<PathBuf>,
    },
    /// Sample an image through a UV position map into a texture
    #[command(name = "uv-extract")]
    UvExtract {
        /// Source image PNG
        image: PathBuf,
        /// Position map bundle directory
        positions: PathBuf,
        /// Output texture PNG
        #[arg(short, long)]
        output: PathBuf,
        /// Validity mask PNG (default: <output>_mask.png)
        #[arg(long)]
        mask_out: Option<PathBuf>,
    },
    /// Evaluate a loss manifest into an itemized report
    #[command(name = "loss-eval")]
    LossEval {
        /// Manifest JSON naming term inputs and scalars
        manifest: PathBuf,
        /// Report JSON path (default: print to standard output)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Weights JSON file overriding manifest and defaults
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Decompose a 1D signal into intrinsic mode functions
    Emd1d {
        /// Signal CSV, one sample per row (last field)
        signal: PathBuf,
        /// Output CSV with imf_1..imf_N,residue columns (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Sift convergence threshold on the normalized squared change
        #[arg(long)]
        sd_threshold: Option<f64>,
        /// Cap on extracted IMFs
        #[arg(long)]
        max_imfs: Option<usize>,
        /// Cap on sift iterations per IMF
        #[arg(long)]
        max_sift_iterations: Option<usize>,
    },
    /// Print and verify a bundle's manifest
    Info {
        /// Bundle directory
        bundle: PathBuf,
    },
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (`emdtex emd1d ... | head`) instead of
    // panicking; Rust spawns with SIGPIPE ignored.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let env_cfg = ToolConfig::from_env()?;
    let jobs = cli.jobs.or(env_cfg.jobs);
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Error::InvalidConfig("jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }

    match cli.command {
        Command::Decompose {
            input,
            output,
            n_bimfs,
            window_rule,
            no_smoothing,
            window_override,
        } => cmd_decompose(
            &env_cfg,
            &input,
            &output,
            n_bimfs,
            window_rule,
            no_smoothing,
            window_override,
        ),
        Command::Fuse {
            bundle,
            output,
            alpha,
            float_out,
        } => cmd_fuse(&env_cfg, &bundle, &output, alpha, float_out),
        Command::SpectralDiff {
            dir_a,
            dir_b,
            sample,
            seed,
            heatmap,
            save_spectra,
        } => cmd_spectral_diff(&env_cfg, &dir_a, &dir_b, sample, seed, heatmap, save_spectra),
        Command::UvExtract {
            image,
            positions,
            output,
            mask_out,
        } => cmd_uv_extract(&image, &positions, &output, mask_out),
        Command::LossEval {
            manifest,
            output,
            weights,
        } => cmd_loss_eval(&env_cfg, &manifest, output.as_deref(), weights.as_deref()),
        Command::Emd1d {
            signal,
            output,
            sd_threshold,
            max_imfs,
            max_sift_iterations,
        } => cmd_emd1d(
            &env_cfg,
            &signal,
            output.as_deref(),
            sd_threshold,
            max_imfs,
            max_sift_iterations,
        ),
        Command::Info { bundle } => cmd_info(&bundle),
    }
}

/// Loads the input as a [0, 1] texture: a PNG path, or an image bundle
/// whose values convert to display units (clamped for float drift).
fn load_texture_input(input: &Path) -> Result<TextureMap> {
    let image = if input.is_dir() {
        let (img, _) = read_image_bundle(input)?;
        match img.range() {
            ValueRange::Unit => img,
            ValueRange::SymmetricUnit => {
                img.map(ValueRange::Unit, |v| ((v + 1.0) / 2.0).clamp(0.0, 1.0))?
            }
            ValueRange::Unbounded => {
                return Err(Error::InvalidInput(format!(
                    "{}: unbounded image bundles cannot be decomposed; fuse writes \
                     symmetric_unit bundles",
                    input.display()
                )))
            }
        }
    } else {
        png::read_image(input)?
    };
    TextureMap::from_image(image)
}

#[allow(clippy::too_many_arguments)]
fn cmd_decompose(
    env_cfg: &ToolConfig,
    input: &Path,
    output: &Path,
    n_bimfs: Option<usize>,
    window_rule: Option<WindowRuleArg>,
    no_smoothing: bool,
    window_override: Option<Vec<usize>>,
) -> Result<()> {
    let cfg = BemdConfig {
        n_bimfs: n_bimfs.or(env_cfg.n_bimfs).unwrap_or(3),
        window_rule: window_rule
            .map(WindowRule::from)
            .or(env_cfg.window_rule)
            .unwrap_or(WindowRule::MinAdjacentExtremaDistance),
        smoothing: if no_smoothing {
            false
        } else {
            env_cfg.smoothing.unwrap_or(true)
        },
        window_override,
    };
    cfg.validate()?;

    let texture = load_texture_input(input)?;
    let d = decompose_texture(&texture, &cfg)?;
    bundle::write_texture_decomposition(output, &d, &cfg)?;

    let n_extracted = d.channels.iter().map(|c| c.bimfs.len()).max().unwrap_or(0);
    println!(
        "decomposed {}x{} -> {} BIMF(s) + residue -> {}",
        texture.height(),
        texture.width(),
        n_extracted,
        output.display()
    );
    for k in 0..n_extracted {
        let mut parts = Vec::new();
        for (name, ch) in ["r", "g", "b"].iter().zip(&d.channels) {
            if let Some(bimf) = ch.bimfs.get(k) {
                let (n_max, n_min) = strict_extrema_count(bimf)?;
                parts.push(format!(
                    "{name} w={} extrema={}/{}",
                    ch.meta.window_sizes[k], n_max, n_min
                ));
            }
        }
        println!("  bimf {}: {}", k + 1, parts.join(", "));
    }
    if n_extracted == 0 {
        eprintln!("warning: input has too few extrema to oscillate; bundle holds only the residue");
    }
    Ok(())
}

fn cmd_fuse(
    env_cfg: &ToolConfig,
    bundle_dir: &Path,
    output: &Path,
    alpha: Option<f64>,
    float_out: bool,
) -> Result<()> {
    let alpha = alpha.or(env_cfg.alpha).unwrap_or(1.0);
    let (d, _) = read_texture_decomposition(bundle_dir)?;
    let fused = d.fuse(alpha)?;
    if float_out {
        bundle::write_image_bundle(output, &fused)?;
    } else {
        png::write_image_8bit(output, &fused)?;
    }
    Ok(())
}

/// Sorted PNG paths under `dir`; sampling keeps sorted order.
fn list_pngs(dir: &Path, sample: Option<usize>, seed: u64) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("png"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::EmptySet {
            context: format!("{} holds no .png images", dir.display()),
        });
    }
    if let Some(k) = sample {
        if k == 0 {
            return Err(Error::InvalidConfig("sample must be at least 1".into()));
        }
        if k < paths.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = rand::seq::index::sample(&mut rng, paths.len(), k).into_vec();
            picked.sort_unstable();
            paths = picked.into_iter().map(|i| paths[i].clone()).collect();
        }
    }
    Ok(paths)
}

/// Loads a directory as mean-spectrum statistics: either a saved
/// spectrum bundle, or a directory of PNGs converted to luma.
fn load_spectrum_input(
    dir: &Path,
    sample: Option<usize>,
    seed: u64,
) -> Result<SpectrumStats> {
    if dir.join(MANIFEST_NAME).is_file() {
        let (stats, _) = bundle::read_spectrum(dir)?;
        return Ok(stats);
    }
    let paths = list_pngs(dir, sample, seed)?;
    let mut fields = Vec::with_capacity(paths.len());
    for p in &paths {
        fields.push(color_to_scalar(&png::read_image(p)?));
    }
    let (h, w) = (fields[0].height(), fields[0].width());
    mean_spectrum(&fields, h, w)
}

fn cmd_spectral_diff(
    env_cfg: &ToolConfig,
    dir_a: &Path,
    dir_b: &Path,
    sample: Option<usize>,
    seed: Option<u64>,
    heatmap: Option<PathBuf>,
    save_spectra: Option<PathBuf>,
) -> Result<()> {
    let sample = sample.or(env_cfg.sample);
    let seed = seed.or(env_cfg.seed).unwrap_or(0);
    let stats_a = load_spectrum_input(dir_a, sample, seed)?;
    let stats_b = load_spectrum_input(dir_b, sample, seed)?;
    let diff = spectral_difference(&stats_a, &stats_b)?;

    if let Some(dir) = save_spectra {
        std::fs::create_dir_all(&dir)?;
        bundle::write_spectrum(&dir.join("spectrum_a"), &stats_a)?;
        bundle::write_spectrum(&dir.join("spectrum_b"), &stats_b)?;
    }
    if let Some(path) = heatmap {
        let (h, w) = stats_a.dims();
        let map = ScalarField::from_fn(h, w, |ij| {
            let d = stats_a.magnitude()[ij] - stats_b.magnitude()[ij];
            d * d
        });
        png::write_gray_8bit(&path, &map)?;
    }

    println!("{diff}");
    Ok(())
}

fn cmd_uv_extract(
    image: &Path,
    positions: &Path,
    output: &Path,
    mask_out: Option<PathBuf>,
) -> Result<()> {
    let img = png::read_image(image)?;
    let (pos, _) = read_position_map(positions)?;
    let texture = extract_texture(&img, &pos)?;
    png::write_image_8bit(output, texture.grid())?;

    let mask_path = mask_out.unwrap_or_else(|| {
        let stem = output
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("texture");
        output.with_file_name(format!("{stem}_mask.png"))
    });
    png::write_mask(&mask_path, texture.mask())?;
    println!(
        "extracted {}x{} texture ({} valid texels) -> {}",
        texture.height(),
        texture.width(),
        texture.mask().iter().filter(|&&b| b).count(),
        output.display()
    );
    Ok(())
}

fn cmd_loss_eval(
    env_cfg: &ToolConfig,
    manifest: &Path,
    output: Option<&Path>,
    weights_file: Option<&Path>,
) -> Result<()> {
    let flag_weights: Option<LossWeights> = match weights_file {
        None => None,
        Some(path) => {
            let w: LossWeights = serde_json::from_slice(&std::fs::read(path)?)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
            Some(w)
        }
    };
    // Flag wins; otherwise the env-config weights stand in for absent
    // manifest weights (the manifest itself still wins over env).
    let parsed = emdtex::io::loss_manifest::read_loss_manifest(manifest)?;
    let override_weights = match (&flag_weights, &parsed.weights, &env_cfg.weights) {
        (Some(w), _, _) => Some(*w),
        (None, None, Some(w)) => Some(*w),
        _ => None,
    };
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    let report = emdtex::io::loss_manifest::evaluate(&parsed, base, override_weights.as_ref())?;
    debug_assert!(report.verify());

    match output {
        Some(path) => write_report(path, &report)?,
        None => {
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            print!("{text}");
        }
    }
    Ok(())
}

fn cmd_emd1d(
    env_cfg: &ToolConfig,
    signal: &Path,
    output: Option<&Path>,
    sd_threshold: Option<f64>,
    max_imfs: Option<usize>,
    max_sift_iterations: Option<usize>,
) -> Result<()> {
    let cfg = SiftConfig {
        sd_threshold: sd_threshold.or(env_cfg.sd_threshold).unwrap_or(0.2),
        max_sift_iterations: max_sift_iterations
            .or(env_cfg.max_sift_iterations)
            .unwrap_or(50),
        max_imfs: max_imfs.or(env_cfg.max_imfs),
    };
    let samples = signal_csv::read_signal(signal)?;
    let d = decompose(&samples, &cfg)?;

    match output {
        Some(path) => {
            signal_csv::write_imfs(path, &d)?;
            eprintln!(
                "{} IMF(s) + residue over {} samples -> {}",
                d.imfs.len(),
                samples.len(),
                path.display()
            );
        }
        None => {
            let bytes = signal_csv::imfs_to_csv(&d)?;
            print!("{}", String::from_utf8_lossy(&bytes));
        }
    }
    if d.max_imfs_hit {
        eprintln!("note: IMF cap reached; residue still oscillates");
    }
    Ok(())
}

fn human_bytes(n: u64) -> String {
    if n >= 1 << 20 {
        format!("{:.1} MiB", n as f64 / (1 << 20) as f64)
    } else if n >= 1 << 10 {
        format!("{:.1} KiB", n as f64 / (1 << 10) as f64)
    } else {
        format!("{n} B")
    }
}

fn cmd_info(dir: &Path) -> Result<()> {
    let manifest = read_manifest(dir)?;
    println!("bundle:  {}", dir.display());
    println!("schema:  {}", manifest.schema_version);
    println!("size:    {}x{} (height x width)", manifest.height, manifest.width);
    match &manifest.kind {
        BundleKind::Decomposition {
            n_bimfs_requested,
            window_sizes,
            normalization,
            source_hash,
            config,
            ..
        } => {
            println!("kind:    decomposition");
            println!("requested BIMFs: {n_bimfs_requested}");
            for (name, ws) in ["r", "g", "b"].iter().zip(window_sizes) {
                println!("windows {name}: {ws:?}");
            }
            println!("normalization: {normalization:?}");
            println!("smoothing: {}", config.smoothing);
            println!("source hash: {source_hash}");
        }
        BundleKind::PositionMap => println!("kind:    position_map"),
        BundleKind::Spectrum { n_images } => {
            println!("kind:    spectrum");
            println!("images averaged: {n_images}");
        }
        BundleKind::Image { range } => {
            println!("kind:    image");
            println!("range:   {range:?}");
        }
    }
    let total: u64 = manifest.components.iter().map(|c| c.bytes).sum();
    verify_bundle(dir)?;
    println!(
        "components: {} files, {}, all digests verified",
        manifest.components.len(),
        human_bytes(total)
    );
    Ok(())
}
