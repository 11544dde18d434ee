//! Spectral and statistical features.
//!
//! [`extract_features`] turns one recording into the ordered 24-value vector:
//!
//! | index   | feature                                                  |
//! |---------|----------------------------------------------------------|
//! | f01-f04 | C3 relative power, delta/theta/alpha/beta                |
//! | f05-f08 | EOG relative power, delta/theta/alpha/beta               |
//! | f09-f12 | OZ relative power, delta/theta/alpha/beta                |
//! | f13     | EOG standard deviation                                   |
//! | f14     | Pearson correlation of LEOG and REOG                     |
//! | f15-f17 | kurtosis of C3, EOG, OZ                                  |
//! | f18-f20 | spectral entropy of C3, EOG, OZ over 0.5-32 Hz (nats)    |
//! | f21-f23 | spectral mean of C3, EOG, OZ over 0.5-32 Hz (Hz)         |
//! | f24     | C3 fractal exponent over 0.5-20 Hz                       |
//!
//! "EOG" is the composite `(LEOG + REOG) / 2` everywhere except f14, which
//! correlates the two raw channels.

mod bsi;
mod csv_io;
mod psd;
mod spectral;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rayon::prelude::*;

use crate::signal_io::{Cohort, Label, Recording, SignalError, WORKING_RATE_HZ};

pub use bsi::{brain_symmetry_index, BsiResult, BSI_HI_HZ, BSI_LO_HZ};
pub use csv_io::{format_sig, read_feature_csv, write_feature_csv, CsvError};
pub use psd::{hamming_periodic, welch_psd, Psd};
pub use spectral::{
    fractal_exponent, relative_band_powers, spectral_entropy, spectral_mean, Band, BandDef,
};
pub use stats::{kurtosis, pearson_correlation, signal_stddev};

pub const N_FEATURES: usize = 24;

/// Column names `f01` through `f24`.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "f01", "f02", "f03", "f04", "f05", "f06", "f07", "f08", "f09", "f10", "f11", "f12", "f13",
    "f14", "f15", "f16", "f17", "f18", "f19", "f20", "f21", "f22", "f23", "f24",
];

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("empty input signal")]
    EmptyInput,
    #[error("segment length {0} must be a power of two >= 2")]
    InvalidSegment(usize),
    #[error("segment length {segment_len} exceeds signal length {len}")]
    SegmentTooLong { segment_len: usize, len: usize },
    #[error("overlap fraction {0} outside [0, 1)")]
    InvalidOverlap(f64),
    #[error("invalid psd: {0}")]
    InvalidPsd(String),
    #[error("band definitions must be ascending and non-overlapping")]
    InvalidBands,
    #[error("psd does not cover {lo_hz}-{hi_hz} Hz")]
    InsufficientBandCoverage { lo_hz: f64, hi_hz: f64 },
    #[error("all four bands carry zero power")]
    ZeroTotalPower,
    #[error("zero power in {lo_hz}-{hi_hz} Hz")]
    ZeroBandPower { lo_hz: f64, hi_hz: f64 },
    #[error("need at least {needed} bins, got {got}")]
    TooFewBins { needed: usize, got: usize },
    #[error("non-positive power at {freq_hz} Hz")]
    NonPositivePower { freq_hz: f64 },
    #[error("need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("input is constant")]
    ConstantInput,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("{left} left vs {right} right spectra (need matching, nonzero counts)")]
    PairCountMismatch { left: usize, right: usize },
    #[error("left and right spectra use different frequency grids")]
    GridMismatch,
    #[error("psd does not cover {lo_hz}-{hi_hz} Hz")]
    BandNotCovered { lo_hz: f64, hi_hz: f64 },
    #[error("left + right power is zero at {freq_hz} Hz")]
    DegenerateBin { freq_hz: f64 },
    #[error("feature value is not finite")]
    NonFinite,
    #[error("channel data: {0}")]
    Signal(#[from] SignalError),
    #[error("feature f{index:02} of subject {subject:?}: {source}")]
    AtFeature {
        subject: String,
        index: usize,
        #[source]
        source: Box<FeatureError>,
    },
}

/// Welch and band-range settings for [`extract_features_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub segment_len: usize,
    pub overlap_frac: f64,
    pub bands: [BandDef; 4],
    pub spectral_range_hz: (f64, f64),
    pub fractal_range_hz: (f64, f64),
}

impl Default for FeatureConfig {
    fn default() -> Self {
        // 256 samples = 4 s at 64 Hz, 0.25 Hz bins
        FeatureConfig {
            segment_len: 256,
            overlap_frac: 0.5,
            bands: BandDef::STANDARD,
            spectral_range_hz: (0.5, 32.0),
            fractal_range_hz: (0.5, 20.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub subject_id: String,
    pub label: Label,
    pub values: [f64; N_FEATURES],
}

impl FeatureVector {
    /// Value by 1-based feature number (`get(1)` is f01).
    pub fn get(&self, number: usize) -> f64 {
        self.values[number - 1]
    }
}

pub fn extract_features(rec: &Recording) -> Result<FeatureVector, FeatureError> {
    extract_features_with(rec, &FeatureConfig::default())
}

pub fn extract_features_with(rec: &Recording, cfg: &FeatureConfig) -> Result<FeatureVector, FeatureError> {
    let at = |index: usize| {
        let subject = rec.subject_id.clone();
        move |e: FeatureError| FeatureError::AtFeature {
            subject,
            index,
            source: Box::new(e),
        }
    };

    let c3 = rec.require("C3")?;
    let oz = rec.require("OZ")?;
    let leog = rec.require("LEOG")?;
    let reog = rec.require("REOG")?;
    if leog.samples.len() != reog.samples.len() || leog.sample_rate_hz != reog.sample_rate_hz {
        return Err(at(5)(FeatureError::LengthMismatch(
            leog.samples.len(),
            reog.samples.len(),
        )));
    }
    let eog: Vec<f64> = leog
        .samples
        .iter()
        .zip(&reog.samples)
        .map(|(l, r)| 0.5 * (l + r))
        .collect();

    let psd_of = |samples: &[f64], rate: f64| welch_psd(samples, rate, cfg.segment_len, cfg.overlap_frac);
    let c3_psd = psd_of(&c3.samples, c3.sample_rate_hz).map_err(at(1))?;
    let eog_psd = psd_of(&eog, leog.sample_rate_hz).map_err(at(5))?;
    let oz_psd = psd_of(&oz.samples, oz.sample_rate_hz).map_err(at(9))?;

    let mut v = [0.0; N_FEATURES];
    let (slo, shi) = cfg.spectral_range_hz;
    for (block, (psd, first)) in [(&c3_psd, 1), (&eog_psd, 5), (&oz_psd, 9)].into_iter().enumerate() {
        let rel = relative_band_powers(psd, &cfg.bands).map_err(at(first))?;
        v[first - 1..first + 3].copy_from_slice(&rel);
        v[17 + block] = spectral_entropy(psd, slo, shi).map_err(at(18 + block))?;
        v[20 + block] = spectral_mean(psd, slo, shi).map_err(at(21 + block))?;
    }
    v[12] = signal_stddev(&eog).map_err(at(13))?;
    v[13] = pearson_correlation(&leog.samples, &reog.samples).map_err(at(14))?;
    v[14] = kurtosis(&c3.samples).map_err(at(15))?;
    v[15] = kurtosis(&eog).map_err(at(16))?;
    v[16] = kurtosis(&oz.samples).map_err(at(17))?;
    let (flo, fhi) = cfg.fractal_range_hz;
    v[23] = fractal_exponent(&c3_psd, flo, fhi).map_err(at(24))?;

    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(at(i + 1)(FeatureError::NonFinite));
    }
    Ok(FeatureVector {
        subject_id: rec.subject_id.clone(),
        label: rec.label,
        values: v,
    })
}

/// Features of every recording, after resampling to the working rate.
pub fn extract_cohort_features(cohort: &Cohort, cfg: &FeatureConfig) -> Result<Vec<FeatureVector>, FeatureError> {
    cohort
        .recordings
        .par_iter()
        .map(|rec| extract_features_with(&rec.at_rate(WORKING_RATE_HZ)?, cfg))
        .collect()
}

/// BSI of the C3/C4 pair, or `None` when the recording has no C4 channel.
pub fn recording_bsi(rec: &Recording, cfg: &FeatureConfig) -> Result<Option<BsiResult>, FeatureError> {
    let Some(c4) = rec.channel("C4") else {
        return Ok(None);
    };
    let c3 = rec.require("C3")?;
    let left = welch_psd(&c3.samples, c3.sample_rate_hz, cfg.segment_len, cfg.overlap_frac)?;
    let right = welch_psd(&c4.samples, c4.sample_rate_hz, cfg.segment_len, cfg.overlap_frac)?;
    brain_symmetry_index(&[left], &[right]).map(Some)
}
