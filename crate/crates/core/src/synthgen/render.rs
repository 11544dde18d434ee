use std::f64::consts::PI;

use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::BAND_EDGES_HZ;

/// Real signal of `n` samples whose one-sided power density at bin `k` is
/// `density(f_k)`. Every bin gets its exact amplitude and a uniform random
/// phase; DC and Nyquist are left empty.
pub fn shaped_noise<R: Rng>(n: usize, fs: f64, density: impl Fn(f64) -> f64, rng: &mut R) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    let df = fs / n as f64;
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for k in 1..n.div_ceil(2) {
        let s = density(k as f64 * df);
        let phase = 2.0 * PI * rng.random::<f64>();
        if s <= 0.0 {
            continue;
        }
        // cosine of amplitude sqrt(2 S df) carries power S df
        let half_amp = 0.5 * (2.0 * s * df).sqrt();
        let c = Complex::from_polar(half_amp, phase);
        buf[k] = c;
        buf[n - k] = c.conj();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Flat-spectrum noise between `lo_hz` and `hi_hz` with standard deviation `std`.
pub fn band_limited_noise<R: Rng>(n: usize, fs: f64, lo_hz: f64, hi_hz: f64, std: f64, rng: &mut R) -> Vec<f64> {
    let df = fs / n as f64;
    let count = (1..n.div_ceil(2))
        .filter(|&k| (lo_hz..=hi_hz).contains(&(k as f64 * df)))
        .count()
        .max(1);
    let level = std * std / (count as f64 * df);
    shaped_noise(
        n,
        fs,
        |f| if (lo_hz..=hi_hz).contains(&f) { level } else { 0.0 },
        rng,
    )
}

fn band_of(f: f64) -> Option<usize> {
    if f >= BAND_EDGES_HZ[0] && f <= BAND_EDGES_HZ[4] {
        Some((1..4).find(|&b| f < BAND_EDGES_HZ[b]).map_or(3, |b| b - 1))
    } else {
        None
    }
}

/// EEG-like channel: inside 0.5-20 Hz each band holds `targets[b]` of the
/// power with a `f^-exponent` tilt; below 0.5 Hz (down to 0.1 Hz) the density
/// stays at its 0.5 Hz value; above 20 Hz it falls as `f^-2`. The in-band
/// power is `amplitude^2`.
pub fn eeg_channel<R: Rng>(n: usize, fs: f64, targets: &[f64; 4], exponent: f64, amplitude: f64, rng: &mut R) -> Vec<f64> {
    let df = fs / n as f64;
    let tilt = |f: f64| f.powf(-exponent);
    let mut mass = [0.0; 4];
    for k in 1..n.div_ceil(2) {
        let f = k as f64 * df;
        if let Some(b) = band_of(f) {
            mass[b] += tilt(f) * df;
        }
    }
    let power = amplitude * amplitude;
    let scale: [f64; 4] = std::array::from_fn(|b| if mass[b] > 0.0 { targets[b] * power / mass[b] } else { 0.0 });
    let (lo, hi) = (BAND_EDGES_HZ[0], BAND_EDGES_HZ[4]);
    let floor = scale[0] * tilt(lo);
    let edge = scale[3] * tilt(hi);
    shaped_noise(
        n,
        fs,
        |f| match band_of(f) {
            Some(b) => scale[b] * tilt(f),
            None if (0.1..lo).contains(&f) => floor,
            None if f > hi => edge * (f / hi).powi(-2),
            None => 0.0,
        },
        rng,
    )
}
