//! Multi-scale image decomposition and recombination for texture work.
//!
//! The core operation splits a 2D field into a stack of oscillatory
//! detail components plus a smooth trend, using order-statistics
//! envelopes (sliding max/min with optional smoothing) and a single
//! sift per component. On top of that sit:
//!
//! - [`bemd`]: the 2D decomposition itself, per channel or over RGB
//!   textures, with data-derived envelope window sizes.
//! - [`emd1d`]: the classic 1D sifting algorithm with cubic-spline
//!   envelopes, for signals and as a reference point.
//! - [`texture`]: UV-space texture extraction from images via position
//!   maps, and detail/trend recombination with a strength knob.
//! - [`spectral`]: mean 2D spectra over image sets and a squared-error
//!   spectral distance, for measuring detail retention.
//! - [`losses`]: the weighted training objective assembled from L1
//!   terms, age codes, and externally computed adversarial scores.
//! - [`io`]: digest-checked directory bundles, PNG/CSV exchange, and
//!   loss-evaluation manifests.
//! - [`synth`]: deterministic synthetic fields for tests and examples.
//!
//! Decomposition orders components fine to coarse: the first component
//! holds the highest-frequency content, the residue the overall trend.
//! Reconstruction is subtractive, so summing every component and the
//! residue restores the input to floating-point accuracy.
//!
//! ```
//! use emdtex::bemd::{decompose_texture, BemdConfig};
//! use emdtex::texture::TextureMap;
//! use emdtex::synth;
//!
//! let photo = TextureMap::from_image(synth::synthetic_photo(32, 32, 7)).unwrap();
//! let cfg = BemdConfig { n_bimfs: 2, ..BemdConfig::default() };
//! let d = decompose_texture(&photo, &cfg).unwrap();
//!
//! // Full-strength recombination restores the input.
//! let back = d.reconstruct_unit().unwrap();
//! assert!(back.max_abs_diff(photo.grid()).unwrap() < 1e-6);
//!
//! // alpha scales the detail aggregate against the trend.
//! let softened = d.fuse(0.5).unwrap();
//! assert_eq!(softened.height(), 32);
//! ```

pub mod bemd;
pub mod config;
mod digest;
pub mod emd1d;
pub mod error;
pub mod field;
pub mod io;
pub mod losses;
pub mod spectral;
pub mod spline;
pub mod synth;
pub mod texture;

pub use error::{Error, Result};
pub use field::{MultiChannelField, ScalarField, ValueRange};
