//! Scalar and three-channel field types.
//!
//! [`ScalarField`] wraps a 2-D array of finite values; the constructor is
//! the validation boundary, so every function taking a field can assume
//! finiteness. [`MultiChannelField`] bundles three equally shaped planes
//! with a declared value range so pipelines know how to map stored values
//! back to display units.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declared range of stored values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueRange {
    /// Stored in [0, 1]; display units are the values themselves.
    Unit,
    /// Stored in [-1, 1]; display units are `(v + 1) / 2`.
    SymmetricUnit,
    /// No range contract (decomposition components, spectra).
    Unbounded,
}

impl ValueRange {
    /// Maps a stored value to display units in [0, 1]. `Unbounded` values
    /// pass through unchanged.
    pub fn to_unit(self, v: f64) -> f64 {
        match self {
            ValueRange::Unit | ValueRange::Unbounded => v,
            ValueRange::SymmetricUnit => (v + 1.0) / 2.0,
        }
    }
}

/// 2-D array of finite f64 values, indexed `(row, column)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    data: Array2<f64>,
}

impl ScalarField {
    /// Validates that every value is finite.
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if let Some(((r, c), v)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("field value at ({r}, {c}) = {v}"),
            });
        }
        Ok(ScalarField { data })
    }

    /// Wraps values already known to be finite (arithmetic on validated
    /// inputs). Debug builds still check.
    pub(crate) fn from_array_unchecked(data: Array2<f64>) -> Self {
        debug_assert!(data.iter().all(|v| v.is_finite()));
        ScalarField { data }
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        ScalarField {
            data: Array2::zeros((height, width)),
        }
    }

    /// Builds a field from a function of `(row, column)`.
    ///
    /// Panics if the function produces a non-finite value; use
    /// [`ScalarField::new`] for untrusted generators.
    pub fn from_fn(height: usize, width: usize, f: impl FnMut((usize, usize)) -> f64) -> Self {
        ScalarField::new(Array2::from_shape_fn((height, width), f))
            .expect("from_fn produced a non-finite value")
    }

    pub fn height(&self) -> usize {
        self.data.nrows()
    }

    pub fn width(&self) -> usize {
        self.data.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_values(self) -> Array2<f64> {
        self.data
    }

    /// Minimum and maximum value. Zero-sized fields cannot be constructed
    /// through the public API, so both always exist.
    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in self.data.iter() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// max - min; 0 for a constant field.
    pub fn value_span(&self) -> f64 {
        let (lo, hi) = self.min_max();
        hi - lo
    }

    /// Largest absolute difference against another field of the same shape.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        if self.data.dim() != other.data.dim() {
            return Err(shape_mismatch(self.data.dim(), other.data.dim()));
        }
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

impl std::ops::Index<(usize, usize)> for ScalarField {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.data[idx]
    }
}

pub(crate) fn shape_mismatch(left: (usize, usize), right: (usize, usize)) -> Error {
    Error::ShapeMismatch {
        left: format!("{}x{}", left.0, left.1),
        right: format!("{}x{}", right.0, right.1),
    }
}

/// Three equally shaped planes plus a declared [`ValueRange`].
///
/// Channel order is fixed: 0 = red, 1 = green, 2 = blue for images; the
/// same slots carry x, y, z when a position map is staged through one.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelField {
    channels: [Array2<f64>; 3],
    range: ValueRange,
}

impl MultiChannelField {
    /// Validates equal shapes and finite values.
    pub fn new(channels: [Array2<f64>; 3], range: ValueRange) -> Result<Self> {
        let dim = channels[0].dim();
        for (i, ch) in channels.iter().enumerate() {
            if ch.dim() != dim {
                return Err(shape_mismatch(dim, ch.dim()));
            }
            if let Some(((r, c), v)) = ch.indexed_iter().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("channel {i} value at ({r}, {c}) = {v}"),
                });
            }
        }
        Ok(MultiChannelField { channels, range })
    }

    pub(crate) fn from_channels_unchecked(channels: [Array2<f64>; 3], range: ValueRange) -> Self {
        debug_assert!(channels.iter().all(|ch| ch.dim() == channels[0].dim()));
        debug_assert!(channels.iter().all(|ch| ch.iter().all(|v| v.is_finite())));
        MultiChannelField { channels, range }
    }

    pub fn zeros(height: usize, width: usize, range: ValueRange) -> Self {
        MultiChannelField {
            channels: std::array::from_fn(|_| Array2::zeros((height, width))),
            range,
        }
    }

    pub fn height(&self) -> usize {
        self.channels[0].nrows()
    }

    pub fn width(&self) -> usize {
        self.channels[0].ncols()
    }

    pub fn range(&self) -> ValueRange {
        self.range
    }

    pub fn channel(&self, c: usize) -> &Array2<f64> {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Array2<f64>; 3] {
        &self.channels
    }

    pub fn into_channels(self) -> [Array2<f64>; 3] {
        self.channels
    }

    /// Applies `f` to every value; the result declares `range`.
    pub fn map(&self, range: ValueRange, f: impl Fn(f64) -> f64) -> Result<Self> {
        let channels = [
            self.channels[0].mapv(&f),
            self.channels[1].mapv(&f),
            self.channels[2].mapv(&f),
        ];
        MultiChannelField::new(channels, range)
    }

    /// Combines two fields value-by-value; the result declares `range`.
    pub fn zip_map(
        &self,
        other: &Self,
        range: ValueRange,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if self.channels[0].dim() != other.channels[0].dim() {
            return Err(shape_mismatch(
                self.channels[0].dim(),
                other.channels[0].dim(),
            ));
        }
        let mk = |c: usize| {
            let mut out = self.channels[c].clone();
            out.zip_mut_with(&other.channels[c], |a, &b| *a = f(*a, b));
            out
        };
        MultiChannelField::new([mk(0), mk(1), mk(2)], range)
    }

    /// Largest absolute difference across all channels.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.channels[0].dim() != other.channels[0].dim() {
            return Err(shape_mismatch(
                self.channels[0].dim(),
                other.channels[0].dim(),
            ));
        }
        let mut worst = 0.0f64;
        for c in 0..3 {
            for (a, b) in self.channels[c].iter().zip(other.channels[c].iter()) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }
}
