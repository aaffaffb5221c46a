//! One-dimensional empirical mode decomposition.
//!
//! A signal is split into intrinsic mode functions (IMFs) by repeated
//! sifting: envelopes through the maxima and minima are averaged and the
//! mean is subtracted until the candidate stabilizes, then the candidate
//! is removed from the signal and the process repeats on the remainder.
//! IMFs come out ordered from highest to lowest frequency; the final
//! remainder (fewer than two maxima or two minima) is the residue.
//! Construction is subtractive, so the IMFs plus residue reproduce the
//! input to accumulation rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::NaturalCubicSpline;

/// Sifting controls.
///
/// `sd_threshold` is the Cauchy criterion bound: sifting stops once
/// `Σ(h_prev - h)² / Σ h_prev² < sd_threshold`. `max_imfs` bounds how many
/// IMFs decomposition extracts; `None` runs until the residue stops
/// oscillating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiftConfig {
    pub sd_threshold: f64,
    pub max_sift_iterations: usize,
    pub max_imfs: Option<usize>,
}

impl Default for SiftConfig {
    fn default() -> Self {
        SiftConfig {
            sd_threshold: 0.2,
            max_sift_iterations: 50,
            max_imfs: None,
        }
    }
}

impl SiftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sd_threshold <= 0.0 || !self.sd_threshold.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sd_threshold must be finite and > 0, got {}",
                self.sd_threshold
            )));
        }
        if self.max_sift_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_sift_iterations must be at least 1".into(),
            ));
        }
        if self.max_imfs == Some(0) {
            return Err(Error::InvalidConfig("max_imfs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of [`decompose`]: IMFs ordered high frequency first, plus the
/// residue. `max_imfs_hit` records that the IMF cap stopped extraction
/// while the residue was still oscillatory.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition1d {
    pub imfs: Vec<Vec<f64>>,
    pub residue: Vec<f64>,
    pub max_imfs_hit: bool,
}

impl Decomposition1d {
    /// Sum of all IMFs plus the residue.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residue.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(imf) {
                *o += v;
            }
        }
        out
    }
}

/// Which envelope a knot set describes. Only error reporting differs;
/// the caller chooses the knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeSide {
    Upper,
    Lower,
}

/// Finds strict local extrema.
///
/// A run of equal values flanked on both sides by strictly smaller
/// (larger) values yields one maximum (minimum) at the run's center
/// index, rounding left. Runs touching either endpoint are not extrema,
/// so monotone and constant signals yield empty lists. Returned indices
/// are strictly increasing.
pub fn find_extrema(s: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let n = s.len();
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    if n < 3 {
        return (maxima, minima);
    }
    let mut i = 1;
    while i < n - 1 {
        if s[i] == s[i - 1] {
            // Interior of a run, or a run that started at the left endpoint.
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && s[j + 1] == s[i] {
            j += 1;
        }
        if j >= n - 1 {
            break; // run reaches the right endpoint
        }
        let left = s[i - 1];
        let right = s[j + 1];
        let center = i + (j - i) / 2;
        if s[i] > left && s[i] > right {
            maxima.push(center);
        } else if s[i] < left && s[i] < right {
            minima.push(center);
        }
        i = j + 1;
    }
    (maxima, minima)
}

/// Natural cubic spline through `(index, s[index])` knots, evaluated at
/// every sample position. Beyond the first and last knot the end segments
/// extend linearly.
pub fn envelope(s: &[f64], extrema: &[usize], side: EnvelopeSide) -> Result<Vec<f64>> {
    if extrema.len() < 2 {
        return Err(Error::TooFewExtrema {
            context: format!(
                "{} envelope needs at least 2 knots, got {}",
                match side {
                    EnvelopeSide::Upper => "upper",
                    EnvelopeSide::Lower => "lower",
                },
                extrema.len()
            ),
        });
    }
    let knots: Vec<(f64, f64)> = extrema.iter().map(|&i| (i as f64, s[i])).collect();
    let spline = NaturalCubicSpline::fit(&knots)?;
    Ok((0..s.len()).map(|i| spline.eval(i as f64)).collect())
}

/// Envelope used inside sifting: before fitting, the two extrema nearest
/// each boundary are mirrored across it to suppress end swings.
fn mirrored_envelope(s: &[f64], extrema: &[usize], side: EnvelopeSide) -> Result<Vec<f64>> {
    if extrema.len() < 2 {
        return Err(Error::TooFewExtrema {
            context: format!(
                "{} envelope needs at least 2 knots, got {}",
                match side {
                    EnvelopeSide::Upper => "upper",
                    EnvelopeSide::Lower => "lower",
                },
                extrema.len()
            ),
        });
    }
    let right_edge = (s.len() - 1) as f64;
    let take = extrema.len().min(2);
    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(extrema.len() + 2 * take);
    for &e in &extrema[..take] {
        knots.push((-(e as f64), s[e]));
    }
    for &e in extrema {
        knots.push((e as f64, s[e]));
    }
    for &e in &extrema[extrema.len() - take..] {
        knots.push((2.0 * right_edge - e as f64, s[e]));
    }
    knots.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite knot x"));
    // An extremum exactly on a boundary mirrors onto itself.
    knots.dedup_by(|a, b| a.0 == b.0);
    let spline = NaturalCubicSpline::fit(&knots)?;
    Ok((0..s.len()).map(|i| spline.eval(i as f64)).collect())
}

/// Extracts one IMF candidate by iterated envelope-mean subtraction.
///
/// Stops when the Cauchy criterion drops below `cfg.sd_threshold` or
/// after `cfg.max_sift_iterations` subtractions. The input must oscillate
/// (at least 2 maxima and 2 minima) or the envelope error propagates; if
/// a later iterate loses its extrema the current candidate is returned
/// as-is.
pub fn sift(s: &[f64], cfg: &SiftConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut h = s.to_vec();
    for iteration in 0..cfg.max_sift_iterations {
        let (maxima, minima) = find_extrema(&h);
        if maxima.len() < 2 || minima.len() < 2 {
            if iteration == 0 {
                return Err(Error::TooFewExtrema {
                    context: format!(
                        "sifting needs at least 2 maxima and 2 minima, got {} and {}",
                        maxima.len(),
                        minima.len()
                    ),
                });
            }
            break;
        }
        let upper = mirrored_envelope(&h, &maxima, EnvelopeSide::Upper)?;
        let lower = mirrored_envelope(&h, &minima, EnvelopeSide::Lower)?;
        let mut sd_num = 0.0;
        let mut sd_den = 0.0;
        for i in 0..h.len() {
            let mean = 0.5 * (upper[i] + lower[i]);
            let next = h[i] - mean;
            sd_num += (h[i] - next) * (h[i] - next);
            sd_den += h[i] * h[i];
            h[i] = next;
        }
        if sd_den == 0.0 || sd_num / sd_den < cfg.sd_threshold {
            break;
        }
    }
    Ok(h)
}

/// Full decomposition: extract IMFs until the remainder stops oscillating
/// or `cfg.max_imfs` is reached.
pub fn decompose(s: &[f64], cfg: &SiftConfig) -> Result<Decomposition1d> {
    cfg.validate()?;
    if s.len() < 4 {
        return Err(Error::SignalTooShort {
            len: s.len(),
            min: 4,
        });
    }
    if let Some((i, v)) = s.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: format!("signal sample {i} = {v}"),
        });
    }
    let mut residue = s.to_vec();
    let mut imfs: Vec<Vec<f64>> = Vec::new();
    let mut max_imfs_hit = false;
    loop {
        let (maxima, minima) = find_extrema(&residue);
        let oscillatory = maxima.len() >= 2 && minima.len() >= 2;
        if !oscillatory {
            break;
        }
        if cfg.max_imfs.is_some_and(|limit| imfs.len() >= limit) {
            max_imfs_hit = true;
            break;
        }
        let imf = sift(&residue, cfg)?;
        for (r, v) in residue.iter_mut().zip(&imf) {
            *r -= v;
        }
        imfs.push(imf);
    }
    Ok(Decomposition1d {
        imfs,
        residue,
        max_imfs_hit,
    })
}

/// Counts sign changes, ignoring exact zeros between opposite signs.
pub fn zero_crossings(s: &[f64]) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for &v in s {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(frequency: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * frequency * i as f64 / n as f64).sin())
            .collect()
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let mut cov = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for (&x, &y) in a.iter().zip(b) {
            cov += (x - ma) * (y - mb);
            va += (x - ma) * (x - ma);
            vb += (y - mb) * (y - mb);
        }
        cov / (va.sqrt() * vb.sqrt())
    }

    /// Brute-force strict-extrema scan used as the oracle for sampled
    /// waveforms (no plateaus, so the plateau rule is irrelevant).
    fn brute_force_extrema(s: &[f64]) -> (Vec<usize>, Vec<usize>) {
        let mut maxima = Vec::new();
        let mut minima = Vec::new();
        for i in 1..s.len() - 1 {
            if s[i] > s[i - 1] && s[i] > s[i + 1] {
                maxima.push(i);
            }
            if s[i] < s[i - 1] && s[i] < s[i + 1] {
                minima.push(i);
            }
        }
        (maxima, minima)
    }

    #[test]
    fn alternating_signal_extrema() {
        let (maxima, minima) = find_extrema(&[0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(maxima, vec![1, 3]);
        assert_eq!(minima, vec![2]);
    }

    #[test]
    fn constant_signal_has_no_extrema() {
        let (maxima, minima) = find_extrema(&[5.0, 5.0, 5.0, 5.0]);
        assert!(maxima.is_empty());
        assert!(minima.is_empty());
    }

    #[test]
    fn monotone_signal_has_no_extrema() {
        let (maxima, minima) = find_extrema(&[0.0, 1.0, 2.0, 3.0]);
        assert!(maxima.is_empty());
        assert!(minima.is_empty());
    }

    #[test]
    fn plateau_yields_center_index_rounding_left() {
        let (maxima, minima) = find_extrema(&[0.0, 2.0, 2.0, 1.0]);
        assert_eq!(maxima, vec![1]);
        assert!(minima.is_empty());

        // Length-3 plateau: center is exact.
        let (maxima, _) = find_extrema(&[0.0, 2.0, 2.0, 2.0, 1.0]);
        assert_eq!(maxima, vec![2]);

        // Plateau touching an endpoint is not an extremum.
        let (maxima, minima) = find_extrema(&[2.0, 2.0, 1.0, 2.0, 2.0]);
        assert!(maxima.is_empty());
        assert_eq!(minima, vec![2]);
    }

    #[test]
    fn sampled_tone_extrema_match_brute_force() {
        let s = tone(4.0, 256);
        let (maxima, minima) = find_extrema(&s);
        assert_eq!(maxima.len(), 4);
        assert_eq!(minima.len(), 4);
        let (bf_max, bf_min) = brute_force_extrema(&s);
        assert_eq!(maxima, bf_max);
        assert_eq!(minima, bf_min);
    }

    #[test]
    fn two_knot_envelope_is_a_line() {
        let mut s = vec![0.0; 11];
        s[0] = 0.0;
        s[10] = 10.0;
        let env = envelope(&s, &[0, 10], EnvelopeSide::Upper).unwrap();
        assert_eq!(env[5], 5.0);
        for (i, &v) in env.iter().enumerate() {
            assert_eq!(v, i as f64);
        }
    }

    #[test]
    fn equal_knots_give_constant_segment() {
        let s = vec![0.0, 1.0, 0.0, 1.0, 0.0];
        let env = envelope(&s, &[1, 3], EnvelopeSide::Upper).unwrap();
        assert_eq!(env[1], 1.0);
        assert_eq!(env[2], 1.0);
        assert_eq!(env[3], 1.0);
    }

    #[test]
    fn tone_upper_envelope_stays_near_one_between_knots() {
        let s = tone(4.0, 256);
        let (maxima, _) = find_extrema(&s);
        let env = envelope(&s, &maxima, EnvelopeSide::Upper).unwrap();
        let (first, last) = (maxima[0], *maxima.last().unwrap());
        for (i, &e) in env.iter().enumerate().take(last + 1).skip(first) {
            assert!((e - 1.0).abs() < 0.05, "envelope at {i} = {e}, want near 1");
        }
        // Dense oracle at 10x resolution between the knots.
        let knots: Vec<(f64, f64)> = maxima.iter().map(|&i| (i as f64, s[i])).collect();
        let spline = NaturalCubicSpline::fit(&knots).unwrap();
        let steps = (last - first) * 10;
        for k in 0..=steps {
            let x = first as f64 + k as f64 / 10.0;
            assert!((spline.eval(x) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn envelope_needs_two_knots() {
        let s = vec![0.0, 1.0, 0.0];
        assert!(matches!(
            envelope(&s, &[1], EnvelopeSide::Upper),
            Err(Error::TooFewExtrema { .. })
        ));
    }

    #[test]
    fn sifting_a_pure_tone_changes_little() {
        let s = tone(8.0, 512);
        let imf = sift(&s, &SiftConfig::default()).unwrap();
        assert!(
            pearson(&s, &imf) >= 0.99,
            "correlation {}",
            pearson(&s, &imf)
        );
    }

    #[test]
    fn sifting_an_extracted_imf_is_nearly_idempotent() {
        let cfg = SiftConfig::default();
        let s: Vec<f64> = tone(32.0, 1024)
            .iter()
            .zip(tone(4.0, 1024))
            .map(|(a, b)| a + b)
            .collect();
        let d = decompose(&s, &cfg).unwrap();
        let first = &d.imfs[0];
        let again = sift(first, &cfg).unwrap();
        // One stabilized candidate passes straight through the stop rule:
        // the relative squared change of a single extra pass is below the
        // threshold, and the waveform is essentially unchanged.
        let num: f64 = first
            .iter()
            .zip(&again)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let den: f64 = first.iter().map(|v| v * v).sum();
        assert!(num / den < cfg.sd_threshold);
        assert!(pearson(first, &again) > 0.99);
    }

    #[test]
    fn single_sift_iteration_subtracts_once() {
        let s = tone(8.0, 256);
        let cfg = SiftConfig {
            max_sift_iterations: 1,
            // A threshold this small never stops a pass early, so the
            // iteration cap is what ends the loop.
            sd_threshold: 1e-300,
            max_imfs: None,
        };
        let once = sift(&s, &cfg).unwrap();
        let (maxima, minima) = find_extrema(&s);
        let upper = mirrored_envelope(&s, &maxima, EnvelopeSide::Upper).unwrap();
        let lower = mirrored_envelope(&s, &minima, EnvelopeSide::Lower).unwrap();
        let expected: Vec<f64> = (0..s.len())
            .map(|i| s[i] - 0.5 * (upper[i] + lower[i]))
            .collect();
        assert_eq!(once, expected);
    }

    #[test]
    fn sift_rejects_non_oscillatory_input() {
        let ramp: Vec<f64> = (0..16).map(|i| i as f64).collect();
        assert!(matches!(
            sift(&ramp, &SiftConfig::default()),
            Err(Error::TooFewExtrema { .. })
        ));
    }

    #[test]
    fn constant_signal_decomposes_to_residue_only() {
        let s = vec![5.0; 32];
        let d = decompose(&s, &SiftConfig::default()).unwrap();
        assert!(d.imfs.is_empty());
        assert_eq!(d.residue, s);
        assert!(!d.max_imfs_hit);
    }

    #[test]
    fn linear_ramp_decomposes_to_residue_only() {
        let s: Vec<f64> = (0..32).map(|i| 0.5 * i as f64).collect();
        let d = decompose(&s, &SiftConfig::default()).unwrap();
        assert!(d.imfs.is_empty());
        assert_eq!(d.residue, s);
    }

    #[test]
    fn short_signal_is_rejected() {
        assert!(matches!(
            decompose(&[1.0, 2.0, 1.0], &SiftConfig::default()),
            Err(Error::SignalTooShort { len: 3, min: 4 })
        ));
    }

    #[test]
    fn non_finite_signal_is_rejected() {
        let s = vec![0.0, 1.0, f64::NAN, 1.0, 0.0];
        assert!(matches!(
            decompose(&s, &SiftConfig::default()),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn two_tone_separates_into_its_constituents() {
        let n = 1024;
        let high = tone(32.0, n);
        let low = tone(4.0, n);
        let s: Vec<f64> = high.iter().zip(&low).map(|(a, b)| a + b).collect();
        let d = decompose(&s, &SiftConfig::default()).unwrap();
        assert!(d.imfs.len() >= 2, "got {} IMFs", d.imfs.len());
        // Compare on the central 80% where boundary effects are gone.
        let lo = n / 10;
        let hi = n - n / 10;
        let c_high = pearson(&d.imfs[0][lo..hi], &high[lo..hi]);
        let c_low = pearson(&d.imfs[1][lo..hi], &low[lo..hi]);
        assert!(c_high >= 0.95, "first IMF vs fast tone: {c_high}");
        assert!(c_low >= 0.95, "second IMF vs slow tone: {c_low}");
    }

    #[test]
    fn reconstruction_is_exact_to_rounding() {
        let n = 512;
        let s: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                (2.0 * std::f64::consts::PI * 24.0 * t).sin()
                    + 0.5 * (2.0 * std::f64::consts::PI * 3.0 * t).cos()
                    + 2.0 * t
            })
            .collect();
        let d = decompose(&s, &SiftConfig::default()).unwrap();
        let r = d.reconstruct();
        let max_in = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in s.iter().zip(&r) {
            assert!((a - b).abs() <= 1e-9 * max_in);
        }
    }

    #[test]
    fn imf_zero_crossings_are_non_increasing() {
        let n = 1024;
        let s: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                (2.0 * std::f64::consts::PI * 48.0 * t).sin()
                    + (2.0 * std::f64::consts::PI * 9.0 * t).sin()
                    + 0.8 * (2.0 * std::f64::consts::PI * 2.0 * t).cos()
            })
            .collect();
        let d = decompose(&s, &SiftConfig::default()).unwrap();
        assert!(d.imfs.len() >= 2);
        let counts: Vec<usize> = d.imfs.iter().map(|imf| zero_crossings(imf)).collect();
        for w in counts.windows(2) {
            assert!(w[0] >= w[1], "zero-crossing counts not ordered: {counts:?}");
        }
    }

    #[test]
    fn max_imfs_caps_extraction_and_sets_the_flag() {
        let n = 1024;
        let s: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                (2.0 * std::f64::consts::PI * 32.0 * t).sin()
                    + (2.0 * std::f64::consts::PI * 4.0 * t).sin()
            })
            .collect();
        let cfg = SiftConfig {
            max_imfs: Some(1),
            ..SiftConfig::default()
        };
        let d = decompose(&s, &cfg).unwrap();
        assert_eq!(d.imfs.len(), 1);
        assert!(d.max_imfs_hit);
    }

    #[test]
    fn zero_crossing_counting() {
        assert_eq!(zero_crossings(&[1.0, -1.0, 1.0, -1.0]), 3);
        assert_eq!(zero_crossings(&[1.0, 0.0, -1.0]), 1);
        assert_eq!(zero_crossings(&[1.0, 0.0, 1.0]), 0);
        assert_eq!(zero_crossings(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(zero_crossings(&[1.0, 2.0, 3.0]), 0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let bad = SiftConfig {
            sd_threshold: 0.0,
            ..SiftConfig::default()
        };
        assert!(matches!(
            decompose(&[0.0, 1.0, 0.0, 1.0, 0.0], &bad),
            Err(Error::InvalidConfig(_))
        ));
        let bad = SiftConfig {
            max_sift_iterations: 0,
            ..SiftConfig::default()
        };
        assert!(sift(&[0.0, 1.0, 0.0, 1.0, 0.0], &bad).is_err());
    }
}
