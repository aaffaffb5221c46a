//! Crate-wide error type.
//!
//! One enum for every failure the library can produce. CLI callers map
//! each variant to a process exit code through [`Error::exit_code`]:
//! domain and validation failures exit 1, input format and I/O failures
//! exit 2.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Signal has too few samples for the requested operation.
    #[error("signal too short: {len} samples, need at least {min}")]
    SignalTooShort { len: usize, min: usize },

    /// An envelope or decomposition step needs more extrema than the data
    /// provides.
    #[error("too few extrema: {context}")]
    TooFewExtrema { context: String },

    /// Field dimensions fall below the operation's minimum.
    #[error("field too small: {height}x{width}, need at least {min}x{min}")]
    FieldTooSmall {
        height: usize,
        width: usize,
        min: usize,
    },

    /// Window size is not odd or is below 3.
    #[error("bad window size {window}: must be odd and at least 3")]
    BadWindow { window: usize },

    /// Two operands that must share a shape do not.
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },

    /// A coordinate points outside the sampled image.
    #[error("coordinate out of bounds at texel ({row}, {col}): {axis} = {value}, valid range [0, {limit})")]
    OutOfBounds {
        row: usize,
        col: usize,
        axis: char,
        value: f64,
        limit: f64,
    },

    /// Age group index outside `1..=n_groups`.
    #[error("age group {group} out of range 1..={n_groups}")]
    GroupOutOfRange { group: usize, n_groups: usize },

    /// An operation over a set of images received an empty set.
    #[error("empty image set: {context}")]
    EmptySet { context: String },

    /// A value that must be finite is NaN or infinite.
    #[error("non-finite value: {context}")]
    NonFinite { context: String },

    /// Configuration rejected before any work started.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A bundle directory is malformed, truncated, or fails digest checks.
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),

    /// A loss manifest is malformed or references unusable inputs.
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    /// Input data (CSV, image, JSON) cannot be parsed into the expected form.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Exit code for CLI reporting: 0 is success (never produced here),
    /// 1 is a validation or invariant failure, 2 is an I/O or format failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::SignalTooShort { .. }
            | Error::TooFewExtrema { .. }
            | Error::FieldTooSmall { .. }
            | Error::BadWindow { .. }
            | Error::ShapeMismatch { .. }
            | Error::OutOfBounds { .. }
            | Error::GroupOutOfRange { .. }
            | Error::NonFinite { .. }
            | Error::InvalidBundle(_) => 1,
            Error::EmptySet { .. }
            | Error::InvalidConfig(_)
            | Error::InvalidManifest(_)
            | Error::InvalidInput(_)
            | Error::Io(_)
            | Error::Image(_)
            | Error::Json(_)
            | Error::Csv(_) => 2,
        }
    }
}
