//! Local extrema detection and data-adaptive window sizing.

use ndarray::Array2;

use super::WindowRule;
use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Marks local extrema against side-adjacent neighbors.
///
/// A pixel is a maximum iff it strictly exceeds each existing neighbor
/// above, below, left, and right; minima mirror that. Diagonal
/// neighbors are deliberately not consulted: oscillations at the pixel
/// scale (a unit checkerboard is the extreme case) tie or alternate
/// along diagonals, and requiring strict dominance there would erase
/// exactly the extrema whose spacing drives the smallest windows. On
/// smooth tie-free data every genuine peak passes both tests alike.
/// Border pixels are compared against the neighbors they have. Needs
/// at least a 3×3 field.
pub fn local_extrema_2d(f: &ScalarField) -> Result<(Array2<bool>, Array2<bool>)> {
    let (h, w) = (f.height(), f.width());
    if h < 3 || w < 3 {
        return Err(Error::FieldTooSmall {
            height: h,
            width: w,
            min: 3,
        });
    }
    let v = f.values();
    let mut maxima = Array2::from_elem((h, w), false);
    let mut minima = Array2::from_elem((h, w), false);
    for i in 0..h {
        for j in 0..w {
            let center = v[(i, j)];
            let mut is_max = true;
            let mut is_min = true;
            for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || nj < 0 || ni >= h as i64 || nj >= w as i64 {
                    continue;
                }
                let n = v[(ni as usize, nj as usize)];
                is_max &= center > n;
                is_min &= center < n;
                if !is_max && !is_min {
                    break;
                }
            }
            maxima[(i, j)] = is_max;
            minima[(i, j)] = is_min;
        }
    }
    Ok((maxima, minima))
}

fn mask_positions(mask: &Array2<bool>) -> Vec<(usize, usize)> {
    mask.indexed_iter()
        .filter_map(|(pos, &set)| set.then_some(pos))
        .collect()
}

/// Distance from each point to its nearest other point, via a bucket
/// grid: rings of cells are scanned outward until no farther cell can
/// hold a closer point.
fn nearest_neighbor_distances(points: &[(usize, usize)], dims: (usize, usize)) -> Vec<f64> {
    let n = points.len();
    debug_assert!(n >= 2);
    let (h, w) = dims;
    let cell = (((h * w) as f64 / n as f64).sqrt().floor() as usize).max(1);
    let grid_h = h.div_ceil(cell);
    let grid_w = w.div_ceil(cell);
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); grid_h * grid_w];
    for (idx, &(r, c)) in points.iter().enumerate() {
        buckets[(r / cell) * grid_w + c / cell].push(idx as u32);
    }

    let dist2 = |a: (usize, usize), b: (usize, usize)| -> f64 {
        let dr = a.0 as f64 - b.0 as f64;
        let dc = a.1 as f64 - b.1 as f64;
        dr * dr + dc * dc
    };

    points
        .iter()
        .enumerate()
        .map(|(idx, &p)| {
            let (gr, gc) = (p.0 / cell, p.1 / cell);
            let mut best = f64::INFINITY;
            let max_ring = grid_h.max(grid_w);
            for ring in 0..=max_ring {
                let r0 = gr.saturating_sub(ring);
                let r1 = (gr + ring).min(grid_h - 1);
                let c0 = gc.saturating_sub(ring);
                let c1 = (gc + ring).min(grid_w - 1);
                for r in r0..=r1 {
                    for c in c0..=c1 {
                        // Only the ring's border cells; inner cells were
                        // scanned on earlier rings.
                        let on_border = r == r0 || r == r1 || c == c0 || c == c1;
                        let in_ring = gr.abs_diff(r) == ring || gc.abs_diff(c) == ring;
                        if !on_border || !in_ring {
                            continue;
                        }
                        for &other in &buckets[r * grid_w + c] {
                            if other as usize != idx {
                                best = best.min(dist2(points[other as usize], p));
                            }
                        }
                    }
                }
                // Any point in an unscanned cell is farther than ring·cell.
                if best.sqrt() <= (ring * cell) as f64 {
                    break;
                }
            }
            best.sqrt()
        })
        .collect()
}

/// Derives the filter window from extrema spacing.
///
/// Every extremum's distance to its nearest neighbor in the same set is
/// collected; the rule reduces the two sets (minimum of everything, or
/// maximum of everything), the result is floored, forced odd by +1, and
/// never below 3. Both masks need at least two set entries.
pub fn window_size(
    maxima: &Array2<bool>,
    minima: &Array2<bool>,
    rule: WindowRule,
) -> Result<usize> {
    let max_pts = mask_positions(maxima);
    let min_pts = mask_positions(minima);
    if max_pts.len() < 2 || min_pts.len() < 2 {
        return Err(Error::TooFewExtrema {
            context: format!(
                "window sizing needs at least 2 maxima and 2 minima, got {} and {}",
                max_pts.len(),
                min_pts.len()
            ),
        });
    }
    let dims = maxima.dim();
    let d_max = nearest_neighbor_distances(&max_pts, dims);
    let d_min = nearest_neighbor_distances(&min_pts, dims);
    let all = d_max.iter().chain(d_min.iter()).copied();
    let chosen = match rule {
        WindowRule::MinAdjacentExtremaDistance => all.fold(f64::INFINITY, f64::min),
        WindowRule::MaxAdjacentExtremaDistance => all.fold(0.0, f64::max),
    };
    let mut w = chosen.floor() as usize;
    if w.is_multiple_of(2) {
        w += 1;
    }
    Ok(w.max(3))
}
