//! Separable sliding-window filters with edge replication.
//!
//! Order-statistics filters (max/min) use a monotonic queue, so cost is
//! O(H·W) per axis independent of window width. The mean filter uses
//! per-lane prefix sums. A w×w window over a replicate-padded field
//! factors exactly into a horizontal pass followed by a vertical pass,
//! for max and min because duplicated edge values cannot change an
//! extreme, for the mean because every padded window has exactly w
//! entries per axis.

use std::collections::VecDeque;

use ndarray::Array2;

use crate::error::{Error, Result};

fn check_window(w: usize) -> Result<usize> {
    if w < 3 || w.is_multiple_of(2) {
        return Err(Error::BadWindow { window: w });
    }
    Ok((w - 1) / 2)
}

/// Fills `padded` (length `lane.len() + 2r`) with the lane's values,
/// replicating the first and last value r times.
fn replicate_into(lane: &[f64], r: usize, padded: &mut Vec<f64>) {
    padded.clear();
    padded.extend(std::iter::repeat_n(lane[0], r));
    padded.extend_from_slice(lane);
    padded.extend(std::iter::repeat_n(lane[lane.len() - 1], r));
}

/// Sliding extreme over every length-w window of `padded`; writes the
/// `padded.len() - w + 1` results into `out`.
fn slide_extreme(padded: &[f64], w: usize, is_max: bool, out: &mut [f64]) {
    debug_assert_eq!(out.len() + w - 1, padded.len());
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, &v) in padded.iter().enumerate() {
        while let Some(&back) = queue.back() {
            let bv = padded[back];
            let dominated = if is_max { bv <= v } else { bv >= v };
            if dominated {
                queue.pop_back();
            } else {
                break;
            }
        }
        queue.push_back(i);
        if i + 1 >= w {
            let start = i + 1 - w;
            while *queue.front().expect("queue never empty here") < start {
                queue.pop_front();
            }
            out[start] = padded[*queue.front().expect("front in window")];
        }
    }
}

/// Sliding mean over every length-w window of `padded` via prefix sums.
fn slide_mean(padded: &[f64], w: usize, prefix: &mut Vec<f64>, out: &mut [f64]) {
    prefix.clear();
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in padded {
        acc += v;
        prefix.push(acc);
    }
    let inv = 1.0 / w as f64;
    for (start, o) in out.iter_mut().enumerate() {
        *o = (prefix[start + w] - prefix[start]) * inv;
    }
}

enum Pass {
    Max,
    Min,
    Mean,
}

fn separable_pass(f: &Array2<f64>, w: usize, pass: Pass) -> Array2<f64> {
    let (h, wid) = f.dim();
    let r = (w - 1) / 2;
    let mut horiz = Array2::zeros((h, wid));
    let mut padded = Vec::with_capacity(wid.max(h) + 2 * r);
    let mut prefix = Vec::new();
    let mut lane = Vec::with_capacity(wid.max(h));
    let mut out = vec![0.0; wid.max(h)];

    for i in 0..h {
        lane.clear();
        lane.extend(f.row(i).iter().copied());
        replicate_into(&lane, r, &mut padded);
        match pass {
            Pass::Max => slide_extreme(&padded, w, true, &mut out[..wid]),
            Pass::Min => slide_extreme(&padded, w, false, &mut out[..wid]),
            Pass::Mean => slide_mean(&padded, w, &mut prefix, &mut out[..wid]),
        }
        for j in 0..wid {
            horiz[(i, j)] = out[j];
        }
    }

    let mut result = Array2::zeros((h, wid));
    for j in 0..wid {
        lane.clear();
        lane.extend(horiz.column(j).iter().copied());
        replicate_into(&lane, r, &mut padded);
        match pass {
            Pass::Max => slide_extreme(&padded, w, true, &mut out[..h]),
            Pass::Min => slide_extreme(&padded, w, false, &mut out[..h]),
            Pass::Mean => slide_mean(&padded, w, &mut prefix, &mut out[..h]),
        }
        for i in 0..h {
            result[(i, j)] = out[i];
        }
    }
    result
}

/// Per-pixel maximum over the w×w window centered on the pixel, with
/// edge-replicated padding. Window must be odd and at least 3.
pub fn sliding_max(f: &Array2<f64>, w: usize) -> Result<Array2<f64>> {
    check_window(w)?;
    Ok(separable_pass(f, w, Pass::Max))
}

/// Per-pixel minimum over the w×w window, edge-replicated.
pub fn sliding_min(f: &Array2<f64>, w: usize) -> Result<Array2<f64>> {
    check_window(w)?;
    Ok(separable_pass(f, w, Pass::Min))
}

/// Per-pixel arithmetic mean over the w×w window, edge-replicated: edge
/// replicas are counted, so every window averages exactly w² values.
pub fn box_mean(f: &Array2<f64>, w: usize) -> Result<Array2<f64>> {
    check_window(w)?;
    Ok(separable_pass(f, w, Pass::Mean))
}
