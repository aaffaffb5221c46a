//! UV-space position maps, texture maps, extraction, and fusion.
//!
//! A position map stores, per UV texel, the image-space sample point
//! (x, y) plus relative depth z, with a validity mask for texels the
//! underlying model covers. Texture extraction bilinearly samples a
//! source image at those points. Fusion recombines a decomposition's
//! detail aggregate and residue with a strength coefficient.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::field::{shape_mismatch, MultiChannelField, ValueRange};

/// Per-texel image-space sample coordinates plus validity.
///
/// Valid texels must hold finite values with `0 <= x < image width` and
/// `0 <= y < image height`; invalid texels may hold anything. Bounds
/// depend on the image being sampled, so they are checked at use time
/// ([`extract_texture`]) and by [`validate_position_map`], not here.
#[derive(Debug, Clone, PartialEq)]
pub struct UVPositionMap {
    x: Array2<f64>,
    y: Array2<f64>,
    z: Array2<f64>,
    mask: Array2<bool>,
}

impl UVPositionMap {
    pub fn new(
        x: Array2<f64>,
        y: Array2<f64>,
        z: Array2<f64>,
        mask: Array2<bool>,
    ) -> Result<Self> {
        let dim = x.dim();
        for other in [y.dim(), z.dim(), mask.dim()] {
            if other != dim {
                return Err(shape_mismatch(dim, other));
            }
        }
        Ok(UVPositionMap { x, y, z, mask })
    }

    /// Map that samples the full image: texel (i, j) reads from
    /// `(j·(w-1)/(W_uv-1), i·(h-1)/(H_uv-1))`, every texel valid, z = 0.
    pub fn identity(uv_height: usize, uv_width: usize, image_height: usize, image_width: usize) -> Self {
        let sx = if uv_width > 1 {
            (image_width - 1) as f64 / (uv_width - 1) as f64
        } else {
            0.0
        };
        let sy = if uv_height > 1 {
            (image_height - 1) as f64 / (uv_height - 1) as f64
        } else {
            0.0
        };
        UVPositionMap {
            x: Array2::from_shape_fn((uv_height, uv_width), |(_, j)| j as f64 * sx),
            y: Array2::from_shape_fn((uv_height, uv_width), |(i, _)| i as f64 * sy),
            z: Array2::zeros((uv_height, uv_width)),
            mask: Array2::from_elem((uv_height, uv_width), true),
        }
    }

    pub fn height(&self) -> usize {
        self.x.nrows()
    }

    pub fn width(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array2<f64> {
        &self.y
    }

    pub fn z(&self) -> &Array2<f64> {
        &self.z
    }

    pub fn mask(&self) -> &Array2<bool> {
        &self.mask
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

/// RGB texture in [0, 1] storage with the validity mask of the position
/// map it was sampled through. Invalid texels carry 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureMap {
    grid: MultiChannelField,
    mask: Array2<bool>,
}

impl TextureMap {
    /// Validates the range declaration, mask shape, and that valid texels
    /// sit inside [0, 1].
    pub fn new(grid: MultiChannelField, mask: Array2<bool>) -> Result<Self> {
        if grid.range() != ValueRange::Unit {
            return Err(Error::InvalidInput(format!(
                "texture maps store [0, 1] values, got range {:?}",
                grid.range()
            )));
        }
        if mask.dim() != grid.channel(0).dim() {
            return Err(shape_mismatch(grid.channel(0).dim(), mask.dim()));
        }
        for c in 0..3 {
            for ((i, j), &valid) in mask.indexed_iter() {
                let v = grid.channel(c)[(i, j)];
                if valid && !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidInput(format!(
                        "texture value {v} at ({i}, {j}) channel {c} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(TextureMap { grid, mask })
    }

    /// Treats a whole [0, 1] image as a texture with every texel valid.
    pub fn from_image(grid: MultiChannelField) -> Result<Self> {
        let mask = Array2::from_elem(grid.channel(0).dim(), true);
        TextureMap::new(grid, mask)
    }

    pub fn grid(&self) -> &MultiChannelField {
        &self.grid
    }

    pub fn mask(&self) -> &Array2<bool> {
        &self.mask
    }

    pub fn height(&self) -> usize {
        self.grid.height()
    }

    pub fn width(&self) -> usize {
        self.grid.width()
    }
}

/// Detail aggregate, trend aggregate, and the recombination strength.
#[derive(Debug, Clone, Copy)]
pub struct FusionInput<'a> {
    pub sigma_c: &'a MultiChannelField,
    pub residue: &'a MultiChannelField,
    pub alpha: f64,
}

/// Pointwise `alpha * sigma_c + residue`. The result declares the
/// residue's value range (fusion does not leave the residue's domain).
pub fn fuse(fin: &FusionInput) -> Result<MultiChannelField> {
    if !fin.alpha.is_finite() {
        return Err(Error::NonFinite {
            context: format!("fusion coefficient alpha = {}", fin.alpha),
        });
    }
    fin.sigma_c
        .zip_map(fin.residue, fin.residue.range(), |c, r| fin.alpha * c + r)
}

fn bilinear(ch: &Array2<f64>, x: f64, y: f64) -> f64 {
    let (h, w) = ch.dim();
    let x0f = x.floor();
    let y0f = y.floor();
    let fx = x - x0f;
    let fy = y - y0f;
    let x0 = (x0f as isize).clamp(0, w as isize - 1) as usize;
    let y0 = (y0f as isize).clamp(0, h as isize - 1) as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let top = ch[(y0, x0)] * (1.0 - fx) + ch[(y0, x1)] * fx;
    let bottom = ch[(y1, x0)] * (1.0 - fx) + ch[(y1, x1)] * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Samples `image` at each valid texel's (x, y) by bilinear
/// interpolation, clamping to the edge within the last half pixel.
/// Invalid texels come out 0 and masked. Valid texels must be finite and
/// inside `[0, width) x [0, height)`.
pub fn extract_texture(image: &MultiChannelField, p: &UVPositionMap) -> Result<TextureMap> {
    if image.range() != ValueRange::Unit {
        return Err(Error::InvalidInput(format!(
            "texture extraction samples [0, 1] images, got range {:?}",
            image.range()
        )));
    }
    let (h_img, w_img) = (image.height() as f64, image.width() as f64);
    let dims = p.x().dim();
    let mut channels = [
        Array2::zeros(dims),
        Array2::zeros(dims),
        Array2::zeros(dims),
    ];
    for ((i, j), &valid) in p.mask().indexed_iter() {
        if !valid {
            continue;
        }
        let x = p.x()[(i, j)];
        let y = p.y()[(i, j)];
        for (axis, v) in [('x', x), ('y', y), ('z', p.z()[(i, j)])] {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("position map {axis} at valid texel ({i}, {j}) = {v}"),
                });
            }
        }
        if !(0.0..w_img).contains(&x) {
            return Err(Error::OutOfBounds {
                row: i,
                col: j,
                axis: 'x',
                value: x,
                limit: w_img,
            });
        }
        if !(0.0..h_img).contains(&y) {
            return Err(Error::OutOfBounds {
                row: i,
                col: j,
                axis: 'y',
                value: y,
                limit: h_img,
            });
        }
        for (c, plane) in channels.iter_mut().enumerate() {
            plane[(i, j)] = bilinear(image.channel(c), x, y);
        }
    }
    TextureMap::new(
        MultiChannelField::new(channels, ValueRange::Unit)?,
        p.mask().clone(),
    )
}

/// One invariant breach found by [`validate_position_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub texel: (usize, usize),
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    NonFinite { axis: char },
    OutOfBounds { axis: char, value: f64, limit: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (r, c) = self.texel;
        match &self.kind {
            ViolationKind::NonFinite { axis } => {
                write!(f, "texel ({r}, {c}): {axis} is not finite")
            }
            ViolationKind::OutOfBounds { axis, value, limit } => {
                write!(
                    f,
                    "texel ({r}, {c}): {axis} = {value} outside [0, {limit})"
                )
            }
        }
    }
}

/// Everything wrong with a position map against a given image size.
/// Empty iff the map satisfies its invariants; masked-invalid texels
/// are exempt.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PositionMapReport {
    pub violations: Vec<Violation>,
}

impl PositionMapReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for PositionMapReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "position map valid");
        }
        writeln!(f, "{} violation(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Checks finiteness of all three coordinates and the (x, y) bounds for
/// every valid texel. Report-based: never errors.
pub fn validate_position_map(
    p: &UVPositionMap,
    image_dims: (usize, usize),
) -> PositionMapReport {
    let (h_img, w_img) = (image_dims.0 as f64, image_dims.1 as f64);
    let mut violations = Vec::new();
    for ((i, j), &valid) in p.mask().indexed_iter() {
        if !valid {
            continue;
        }
        let coords = [
            ('x', p.x()[(i, j)], Some(w_img)),
            ('y', p.y()[(i, j)], Some(h_img)),
            ('z', p.z()[(i, j)], None),
        ];
        for (axis, value, limit) in coords {
            if !value.is_finite() {
                violations.push(Violation {
                    texel: (i, j),
                    kind: ViolationKind::NonFinite { axis },
                });
            } else if let Some(limit) = limit {
                if !(0.0..limit).contains(&value) {
                    violations.push(Violation {
                        texel: (i, j),
                        kind: ViolationKind::OutOfBounds { axis, value, limit },
                    });
                }
            }
        }
    }
    PositionMapReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn unit_image(h: usize, w: usize, f: impl Fn(usize, usize, usize) -> f64) -> MultiChannelField {
        let mk = |c: usize| Array2::from_shape_fn((h, w), |(i, j)| f(c, i, j));
        MultiChannelField::new([mk(0), mk(1), mk(2)], ValueRange::Unit).unwrap()
    }

    #[test]
    fn identity_map_reproduces_the_image_exactly() {
        let img = synth::synthetic_photo(24, 20, 9);
        let p = UVPositionMap::identity(24, 20, 24, 20);
        let t = extract_texture(&img, &p).unwrap();
        assert_eq!(t.grid().max_abs_diff(&img).unwrap(), 0.0);
    }

    #[test]
    fn constant_image_extracts_to_constant_texture() {
        let img = unit_image(10, 10, |c, _, _| [0.2, 0.5, 0.8][c]);
        let p = UVPositionMap::identity(6, 6, 10, 10);
        let t = extract_texture(&img, &p).unwrap();
        for c in 0..3 {
            for &v in t.grid().channel(c).iter() {
                assert_eq!(v, [0.2, 0.5, 0.8][c]);
            }
        }
    }

    #[test]
    fn half_pixel_shift_on_a_ramp_averages_neighbors() {
        let w = 9;
        let img = unit_image(6, w, |_, _, j| j as f64 / (w - 1) as f64);
        // Identity map shifted +0.5 in x, keeping the last column clamped
        // in bounds.
        let x = Array2::from_shape_fn((6, w), |(_, j)| (j as f64 + 0.5).min((w - 1) as f64 + 0.25));
        let y = Array2::from_shape_fn((6, w), |(i, _)| i as f64);
        let p = UVPositionMap::new(x, y, Array2::zeros((6, w)), Array2::from_elem((6, w), true))
            .unwrap();
        let t = extract_texture(&img, &p).unwrap();
        for j in 0..w - 1 {
            let expected =
                0.5 * (j as f64 / (w - 1) as f64) + 0.5 * ((j + 1) as f64 / (w - 1) as f64);
            let got = t.grid().channel(0)[(2, j)];
            assert!((got - expected).abs() < 1e-12, "col {j}: {got} vs {expected}");
        }
        // Last column clamps to the edge value.
        assert!((t.grid().channel(0)[(2, w - 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_texels_come_out_zero_and_masked() {
        let img = unit_image(8, 8, |_, _, _| 0.7);
        let mut mask = Array2::from_elem((4, 4), true);
        mask[(1, 2)] = false;
        let mut x = Array2::from_shape_fn((4, 4), |(_, j)| j as f64);
        x[(1, 2)] = f64::NAN; // exempt: masked invalid
        let y = Array2::from_shape_fn((4, 4), |(i, _)| i as f64);
        let p = UVPositionMap::new(x, y, Array2::zeros((4, 4)), mask).unwrap();
        let t = extract_texture(&img, &p).unwrap();
        assert_eq!(t.grid().channel(0)[(1, 2)], 0.0);
        assert!(!t.mask()[(1, 2)]);
        assert_eq!(t.grid().channel(1)[(0, 0)], 0.7);
    }

    #[test]
    fn out_of_bounds_valid_texel_is_an_error() {
        let img = unit_image(8, 8, |_, _, _| 0.5);
        let mut x = Array2::zeros((3, 3));
        x[(2, 1)] = 11.0; // width 8 + 3
        let p = UVPositionMap::new(
            x,
            Array2::zeros((3, 3)),
            Array2::zeros((3, 3)),
            Array2::from_elem((3, 3), true),
        )
        .unwrap();
        match extract_texture(&img, &p) {
            Err(Error::OutOfBounds {
                row: 2,
                col: 1,
                axis: 'x',
                ..
            }) => {}
            other => panic!("expected OutOfBounds, got {other:?}"),
        }
    }

    #[test]
    fn fuse_matches_pointwise_formula() {
        let sigma = unit_image(5, 5, |c, i, j| (c + i + j) as f64 * 0.01);
        let residue = unit_image(5, 5, |c, i, j| 0.5 - (c as f64) * 0.1 + (i * j) as f64 * 0.001);
        let out = fuse(&FusionInput {
            sigma_c: &sigma,
            residue: &residue,
            alpha: 0.5,
        })
        .unwrap();
        for c in 0..3 {
            for ((i, j), &v) in out.channel(c).indexed_iter() {
                let want = 0.5 * sigma.channel(c)[(i, j)] + residue.channel(c)[(i, j)];
                assert_eq!(v, want);
            }
        }
        // Worked example: alpha=0.5, sigma=2, residue=-1 gives 0.
        assert_eq!(0.5f64 * 2.0 + (-1.0), 0.0);
    }

    #[test]
    fn fuse_alpha_zero_returns_the_residue_exactly() {
        let sigma = unit_image(4, 6, |c, i, j| ((c * 7 + i * 3 + j) % 10) as f64 * 0.1);
        let residue = unit_image(4, 6, |c, i, j| ((c + i + 2 * j) % 10) as f64 * 0.1);
        let out = fuse(&FusionInput {
            sigma_c: &sigma,
            residue: &residue,
            alpha: 0.0,
        })
        .unwrap();
        assert_eq!(out.max_abs_diff(&residue).unwrap(), 0.0);
    }

    #[test]
    fn fuse_is_linear_in_alpha() {
        let sigma = unit_image(6, 6, |c, i, j| ((c * 13 + i * 5 + j * 11) % 17) as f64 * 0.05);
        let residue = unit_image(6, 6, |c, i, j| ((c + i * 7 + j * 3) % 13) as f64 * 0.07);
        let f = |alpha: f64| {
            fuse(&FusionInput {
                sigma_c: &sigma,
                residue: &residue,
                alpha,
            })
            .unwrap()
        };
        let (a1, a2) = (0.3, 1.1);
        let lhs = f(a1)
            .zip_map(&f(a2), ValueRange::Unbounded, |x, y| x + y)
            .unwrap()
            .zip_map(&residue, ValueRange::Unbounded, |x, r| x - r)
            .unwrap();
        let rhs = f(a1 + a2);
        assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-9);
    }

    #[test]
    fn fuse_rejects_shape_mismatch_and_bad_alpha() {
        let a = MultiChannelField::zeros(4, 4, ValueRange::Unbounded);
        let b = MultiChannelField::zeros(4, 5, ValueRange::Unbounded);
        assert!(matches!(
            fuse(&FusionInput {
                sigma_c: &a,
                residue: &b,
                alpha: 1.0
            }),
            Err(Error::ShapeMismatch { .. })
        ));
        let c = MultiChannelField::zeros(4, 4, ValueRange::Unbounded);
        assert!(matches!(
            fuse(&FusionInput {
                sigma_c: &a,
                residue: &c,
                alpha: f64::NAN
            }),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn validation_report_lists_violations_with_texel_coordinates() {
        let dims = (5, 5);
        let mut x = Array2::zeros(dims);
        let mut z = Array2::zeros(dims);
        let mut mask = Array2::from_elem(dims, true);

        let clean = UVPositionMap::new(x.clone(), Array2::zeros(dims), z.clone(), mask.clone())
            .unwrap();
        assert!(validate_position_map(&clean, (8, 8)).is_valid());

        x[(3, 4)] = 8.0 + 3.0; // x = W + 3
        z[(0, 0)] = f64::NAN;
        mask[(0, 0)] = false; // exempt the NaN texel
        let p = UVPositionMap::new(x, Array2::zeros(dims), z, mask).unwrap();
        let report = validate_position_map(&p, (8, 8));
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].texel, (3, 4));
        assert!(matches!(
            report.violations[0].kind,
            ViolationKind::OutOfBounds { axis: 'x', .. }
        ));
    }

    #[test]
    fn nan_on_a_valid_texel_is_reported() {
        let dims = (3, 3);
        let mut z = Array2::zeros(dims);
        z[(1, 1)] = f64::INFINITY;
        let p = UVPositionMap::new(
            Array2::zeros(dims),
            Array2::zeros(dims),
            z,
            Array2::from_elem(dims, true),
        )
        .unwrap();
        let report = validate_position_map(&p, (4, 4));
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            report.violations[0].kind,
            ViolationKind::NonFinite { axis: 'z' }
        ));
    }

    #[test]
    fn texture_map_rejects_out_of_range_valid_values() {
        let mut ch = Array2::zeros((3, 3));
        ch[(1, 1)] = 1.5;
        let grid = MultiChannelField::new(
            [ch, Array2::zeros((3, 3)), Array2::zeros((3, 3))],
            ValueRange::Unit,
        )
        .unwrap();
        assert!(TextureMap::from_image(grid.clone()).is_err());
        // The same value behind a mask is fine.
        let mut mask = Array2::from_elem((3, 3), true);
        mask[(1, 1)] = false;
        assert!(TextureMap::new(grid, mask).is_ok());
    }
}
