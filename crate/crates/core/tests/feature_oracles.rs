use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use strokesig_core::features::{
    extract_features, fractal_exponent, pearson_correlation, relative_band_powers, signal_stddev, spectral_entropy,
    spectral_mean, welch_psd, BandDef, Psd,
};
use strokesig_core::rng::seeded;
use strokesig_core::signal_io::{Channel, Label, Recording};

const FS: f64 = 64.0;

fn white(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn sine(freq: f64, amp: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| amp * (2.0 * PI * freq * i as f64 / FS).sin()).collect()
}

fn psd(x: &[f64]) -> Psd {
    welch_psd(x, FS, 256, 0.5).unwrap()
}

/// Rectangular-window periodogram of the whole signal by direct DFT, one-sided.
fn dft_periodogram(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let a = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            let side = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
            (k as f64 * FS / n as f64, side * (re * re + im * im) / (n as f64 * n as f64))
        })
        .collect()
}

#[test]
fn bin_centered_sine_power_matches_analytic_and_dft() {
    let amp = 3.0;
    let x = sine(8.0, amp, 64 * 60);
    let total = psd(&x).total_power();
    assert!((total - amp * amp / 2.0).abs() / (amp * amp / 2.0) < 0.02, "{total}");
    let oracle: f64 = dft_periodogram(&x[..1024]).iter().map(|(_, p)| p).sum();
    assert!((oracle - amp * amp / 2.0).abs() < 1e-9, "{oracle}");
}

#[test]
fn white_noise_parseval() {
    let x = white(57_600, 1);
    let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    let total = psd(&x).total_power();
    assert!((total - 1.0).abs() < 0.05 && (total - var).abs() / var < 0.05, "{total} vs {var}");
}

#[test]
fn equal_power_sines_split_evenly() {
    let n = 64 * 120;
    let x: Vec<f64> = (0..n)
        .map(|i| [2.0, 6.0, 10.0, 16.0].iter().map(|f| (2.0 * PI * f * i as f64 / FS).sin()).sum())
        .collect();
    let rel = relative_band_powers(&psd(&x), &BandDef::STANDARD).unwrap();
    // oracle: integrate a direct DFT over the same band edges
    let spec = dft_periodogram(&x[..2048]);
    let band = |lo: f64, hi: f64| spec.iter().filter(|(f, _)| *f >= lo && *f < hi).map(|(_, p)| p).sum::<f64>();
    let parts: Vec<f64> = BandDef::STANDARD.iter().map(|b| band(b.lo_hz, b.hi_hz)).collect();
    let total: f64 = parts.iter().sum();
    for (r, p) in rel.iter().zip(&parts) {
        assert!((r - 0.25).abs() <= 0.02, "{rel:?}");
        assert!((p / total - 0.25).abs() <= 0.02);
    }
}

#[test]
fn single_tones_land_in_their_band() {
    for (freq, band) in [(10.0, 2), (6.0, 1)] {
        let rel = relative_band_powers(&psd(&sine(freq, 1.0, 64 * 60)), &BandDef::STANDARD).unwrap();
        assert!(rel[band] >= 0.99, "{freq} Hz: {rel:?}");
        for (i, r) in rel.iter().enumerate() {
            if i != band {
                assert!(*r <= 0.01);
            }
        }
    }
}

#[test]
fn sine_stddev_is_rms() {
    let x = sine(4.0, 1.0, 64 * 10);
    let direct = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    let s = signal_stddev(&x).unwrap();
    assert!((s - 0.5f64.sqrt()).abs() < 1e-6 && (s - direct).abs() < 1e-6);
}

#[test]
fn independent_noise_is_uncorrelated() {
    let (x, y) = (white(57_600, 2), white(57_600, 3));
    let r = pearson_correlation(&x, &y).unwrap();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy = y.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    assert!((r - cov / (sx * sy)).abs() < 1e-12);
    assert!(r.abs() < 0.02, "{r}");
}

#[test]
fn white_noise_entropy_near_maximum() {
    let p = psd(&white(57_600, 4));
    let h = spectral_entropy(&p, 0.5, 32.0).unwrap();
    let bins: Vec<f64> = p
        .freqs_hz
        .iter()
        .zip(&p.power)
        .filter(|(f, _)| (0.5..=32.0).contains(*f))
        .map(|(_, v)| *v)
        .collect();
    let total: f64 = bins.iter().sum();
    let oracle = -bins.iter().map(|v| v / total * (v / total).ln()).sum::<f64>();
    let max = (bins.len() as f64).ln();
    assert!((h - oracle).abs() < 1e-12);
    assert!((h - max).abs() / max < 0.02, "{h} vs ln({})", bins.len());
}

#[test]
fn tone_centroid() {
    let p = psd(&sine(10.0, 1.0, 64 * 60));
    let m = spectral_mean(&p, 0.5, 32.0).unwrap();
    assert!((m - 10.0).abs() <= p.resolution_hz, "{m}");
}

fn loglog_slope(p: &Psd, lo: f64, hi: f64) -> f64 {
    let pts: Vec<(f64, f64)> = p
        .freqs_hz
        .iter()
        .zip(&p.power)
        .filter(|(f, _)| (lo..=hi).contains(*f))
        .map(|(f, v)| (f.ln(), v.ln()))
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x * x, b + x * y));
    -(n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[test]
fn random_walk_has_brown_exponent() {
    let mut acc = 0.0;
    let walk: Vec<f64> = white(57_600, 5)
        .into_iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    let p = psd(&walk);
    let beta = fractal_exponent(&p, 0.5, 20.0).unwrap();
    assert!((beta - loglog_slope(&p, 0.5, 20.0)).abs() < 1e-9);
    assert!((beta - 2.0).abs() <= 0.3, "{beta}");
}

#[test]
fn white_noise_is_flat() {
    let p = psd(&white(57_600, 6));
    let beta = fractal_exponent(&p, 0.5, 20.0).unwrap();
    assert!(beta.abs() <= 0.15, "{beta}");
}

fn recording(c3: Vec<f64>, oz: Vec<f64>, leog: Vec<f64>, reog: Vec<f64>) -> Recording {
    Recording::new(
        "oracle",
        Label::Normal,
        vec![
            Channel::new("C3", FS, c3),
            Channel::new("OZ", FS, oz),
            Channel::new("LEOG", FS, leog),
            Channel::new("REOG", FS, reog),
        ],
    )
    .unwrap()
}

#[test]
fn recording_level_oracles() {
    let n = 64 * 120;
    let eog = white(n, 7);
    let rec = recording(sine(10.0, 5.0, n), white(n, 8), eog.clone(), eog);
    let f = extract_features(&rec).unwrap();
    assert!(f.get(3) >= 0.99);
    assert!((f.get(14) - 1.0).abs() < 1e-12);
    assert!(f.values.iter().all(|v| v.is_finite()));
    for first in [1, 5, 9] {
        let s: f64 = (first..first + 4).map(|i| f.get(i)).sum();
        assert!((s - 1.0).abs() < 1e-9);
    }
    let again = extract_features(&rec).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&f.values), bits(&again.values));
}
