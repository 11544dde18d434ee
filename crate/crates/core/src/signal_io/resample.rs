use std::f64::consts::PI;

use super::SignalError;

/// Length of the anti-alias FIR used by [`downsample`].
pub const ANTI_ALIAS_TAPS: usize = 127;

/// Cutoff as a fraction of the output Nyquist frequency.
const CUTOFF_FRACTION: f64 = 0.8;

/// Hamming-windowed sinc low-pass with unit DC gain.
///
/// `cutoff_hz` is the -6 dB point; `rate_hz` is the rate the filter runs at.
pub fn anti_alias_taps(n_taps: usize, cutoff_hz: f64, rate_hz: f64) -> Vec<f64> {
    let fc = cutoff_hz / rate_hz;
    let mid = (n_taps - 1) as f64 / 2.0;
    let mut taps: Vec<f64> = (0..n_taps)
        .map(|k| {
            let x = (k as f64 - mid).abs();
            let sinc = if x == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * x).sin() / (PI * x)
            };
            let w = if n_taps > 1 {
                0.54 + 0.46 * (2.0 * PI * x / (n_taps - 1) as f64).cos()
            } else {
                1.0
            };
            sinc * w
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Mirror index into `0..n` without repeating the edge sample
/// (`d c b | a b c d | c b a`).
fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Low-pass filters and decimates `samples` from `from_hz` to `to_hz`.
///
/// `from_hz` must be an integer multiple of `to_hz`. The output has
/// `floor(len / factor)` samples; output sample `j` is the zero-phase filtered
/// input at index `j * factor`. The signal is reflect-padded by half the
/// filter length at both ends. A factor of 1 returns the input unchanged.
pub fn downsample(samples: &[f64], from_hz: f64, to_hz: f64) -> Result<Vec<f64>, SignalError> {
    let bad_factor = || SignalError::NonIntegerFactor { from_hz, to_hz };
    if !(from_hz.is_finite() && to_hz.is_finite() && from_hz > 0.0 && to_hz > 0.0) {
        return Err(bad_factor());
    }
    let ratio = from_hz / to_hz;
    let factor = ratio.round();
    if factor < 1.0 || (ratio - factor).abs() > 1e-9 * ratio {
        return Err(bad_factor());
    }
    if samples.is_empty() {
        return Err(SignalError::EmptyInput);
    }
    let factor = factor as usize;
    if factor == 1 {
        return Ok(samples.to_vec());
    }

    let taps = anti_alias_taps(ANTI_ALIAS_TAPS, CUTOFF_FRACTION * to_hz / 2.0, from_hz);
    let half = (ANTI_ALIAS_TAPS / 2) as isize;
    let n = samples.len();
    let out_len = n / factor;
    let mut out = Vec::with_capacity(out_len);
    for j in 0..out_len {
        let center = (j * factor) as isize;
        let lo = center - half;
        let hi = center + half;
        let acc = if lo >= 0 && (hi as usize) < n {
            let window = &samples[lo as usize..=hi as usize];
            taps.iter().zip(window).map(|(h, x)| h * x).sum()
        } else {
            taps.iter()
                .enumerate()
                .map(|(k, h)| h * samples[reflect(lo + k as isize, n)])
                .sum()
        };
        out.push(acc);
    }
    Ok(out)
}
