use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::FeatureError;

/// One-sided power spectral density on a uniform grid starting at 0 Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psd {
    pub freqs_hz: Vec<f64>,
    pub power: Vec<f64>,
    pub resolution_hz: f64,
}

impl Psd {
    /// Builds a PSD from bin powers; bin `i` sits at `i * resolution_hz`.
    pub fn from_bins(power: Vec<f64>, resolution_hz: f64) -> Result<Psd, FeatureError> {
        if !(resolution_hz.is_finite() && resolution_hz > 0.0) {
            return Err(FeatureError::InvalidPsd("resolution must be positive".into()));
        }
        if power.is_empty() {
            return Err(FeatureError::InvalidPsd("no bins".into()));
        }
        if let Some(p) = power.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(FeatureError::InvalidPsd(format!("bin power {p} is not a finite nonnegative value")));
        }
        let freqs_hz = (0..power.len()).map(|i| i as f64 * resolution_hz).collect();
        Ok(Psd {
            freqs_hz,
            power,
            resolution_hz,
        })
    }

    pub fn max_freq(&self) -> f64 {
        *self.freqs_hz.last().expect("psd has at least one bin")
    }

    /// Bin indices with `lo_hz <= f <= hi_hz`, tolerant to grid rounding.
    pub fn bins_in(&self, lo_hz: f64, hi_hz: f64) -> std::ops::Range<usize> {
        let tol = self.resolution_hz * 1e-9;
        let first = ((lo_hz - tol) / self.resolution_hz).ceil().max(0.0) as usize;
        let last = ((hi_hz + tol) / self.resolution_hz).floor();
        if last < 0.0 {
            return 0..0;
        }
        let end = (last as usize + 1).min(self.power.len());
        first.min(end)..end
    }

    /// Integral of the density over all bins.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.resolution_hz
    }
}

/// Periodic (DFT-even) Hamming window.
pub fn hamming_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Welch averaged-periodogram PSD.
///
/// Segments of `segment_len` samples advance by
/// `segment_len - floor(segment_len * overlap_frac)`. Each segment is
/// Hamming-windowed and transformed; periodograms are averaged and scaled by
/// `1 / (rate * sum(w^2))`, with interior bins doubled for the one-sided
/// density. No detrending is applied, so `sum(power) * resolution` equals the
/// window-weighted mean square of the signal.
pub fn welch_psd(
    samples: &[f64],
    rate_hz: f64,
    segment_len: usize,
    overlap_frac: f64,
) -> Result<Psd, FeatureError> {
    if samples.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    if segment_len < 2 || !segment_len.is_power_of_two() {
        return Err(FeatureError::InvalidSegment(segment_len));
    }
    if segment_len > samples.len() {
        return Err(FeatureError::SegmentTooLong {
            segment_len,
            len: samples.len(),
        });
    }
    if !(0.0..1.0).contains(&overlap_frac) {
        return Err(FeatureError::InvalidOverlap(overlap_frac));
    }
    if !(rate_hz.is_finite() && rate_hz > 0.0) {
        return Err(FeatureError::InvalidPsd(format!("sample rate {rate_hz}")));
    }

    let step = segment_len - (segment_len as f64 * overlap_frac).floor() as usize;
    let n_segments = (samples.len() - segment_len) / step + 1;
    let window = hamming_periodic(segment_len);
    let window_power: f64 = window.iter().map(|w| w * w).sum();

    let fft = FftPlanner::new().plan_fft_forward(segment_len);
    let mut buf = vec![Complex::new(0.0, 0.0); segment_len];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let n_bins = segment_len / 2 + 1;
    let mut acc = vec![0.0; n_bins];

    for s in 0..n_segments {
        let seg = &samples[s * step..s * step + segment_len];
        for ((b, x), w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex::new(x * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
    }

    let scale = 1.0 / (rate_hz * window_power * n_segments as f64);
    let nyquist = segment_len / 2;
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || k == nyquist { 1.0 } else { 2.0 };
            a * scale * one_sided
        })
        .collect();
    Psd::from_bins(power, rate_hz / segment_len as f64)
}
