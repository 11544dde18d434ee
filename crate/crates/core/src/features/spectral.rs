use serde::{Deserialize, Serialize};

use super::{FeatureError, Psd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Delta,
    Theta,
    Alpha,
    Beta,
}

/// Frequency band `[lo_hz, hi_hz)`, or `[lo_hz, hi_hz]` when `closed` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandDef {
    pub name: Band,
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub closed: bool,
}

impl BandDef {
    /// delta [0.5, 4), theta [4, 8), alpha [8, 13), beta [13, 20].
    pub const STANDARD: [BandDef; 4] = [
        BandDef { name: Band::Delta, lo_hz: 0.5, hi_hz: 4.0, closed: false },
        BandDef { name: Band::Theta, lo_hz: 4.0, hi_hz: 8.0, closed: false },
        BandDef { name: Band::Alpha, lo_hz: 8.0, hi_hz: 13.0, closed: false },
        BandDef { name: Band::Beta, lo_hz: 13.0, hi_hz: 20.0, closed: true },
    ];

    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo_hz && (f < self.hi_hz || (self.closed && f <= self.hi_hz))
    }
}

/// Collects the bins of `[lo_hz, hi_hz]`, checking the range lies within the PSD.
fn band_slice(psd: &Psd, lo_hz: f64, hi_hz: f64, min_bins: usize) -> Result<std::ops::Range<usize>, FeatureError> {
    if !(lo_hz >= 0.0 && hi_hz > lo_hz && hi_hz <= psd.max_freq() + psd.resolution_hz * 1e-9) {
        return Err(FeatureError::InsufficientBandCoverage { lo_hz, hi_hz });
    }
    let bins = psd.bins_in(lo_hz, hi_hz);
    if bins.len() < min_bins {
        return Err(FeatureError::TooFewBins {
            needed: min_bins,
            got: bins.len(),
        });
    }
    Ok(bins)
}

/// Power of each band divided by the summed power of all four bands.
pub fn relative_band_powers(psd: &Psd, bands: &[BandDef; 4]) -> Result<[f64; 4], FeatureError> {
    for w in bands.windows(2) {
        if w[0].hi_hz > w[1].lo_hz || w[0].lo_hz >= w[0].hi_hz {
            return Err(FeatureError::InvalidBands);
        }
    }
    let mut out = [0.0; 4];
    for (o, band) in out.iter_mut().zip(bands) {
        if band.hi_hz > psd.max_freq() + psd.resolution_hz * 1e-9 {
            return Err(FeatureError::InsufficientBandCoverage {
                lo_hz: band.lo_hz,
                hi_hz: band.hi_hz,
            });
        }
        let mut n = 0;
        for (f, p) in psd.freqs_hz.iter().zip(&psd.power) {
            if band.contains(*f) {
                *o += p * psd.resolution_hz;
                n += 1;
            }
        }
        if n == 0 {
            return Err(FeatureError::InsufficientBandCoverage {
                lo_hz: band.lo_hz,
                hi_hz: band.hi_hz,
            });
        }
    }
    let total: f64 = out.iter().sum();
    if total <= 0.0 {
        return Err(FeatureError::ZeroTotalPower);
    }
    out.iter_mut().for_each(|v| *v /= total);
    Ok(out)
}

/// Shannon entropy (nats) of the PSD normalized over `[lo_hz, hi_hz]`.
pub fn spectral_entropy(psd: &Psd, lo_hz: f64, hi_hz: f64) -> Result<f64, FeatureError> {
    let bins = band_slice(psd, lo_hz, hi_hz, 2)?;
    let p = &psd.power[bins];
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return Err(FeatureError::ZeroBandPower { lo_hz, hi_hz });
    }
    let h = -p
        .iter()
        .filter(|v| **v > 0.0)
        .map(|v| {
            let q = v / total;
            q * q.ln()
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

/// Power-weighted mean frequency over `[lo_hz, hi_hz]`.
pub fn spectral_mean(psd: &Psd, lo_hz: f64, hi_hz: f64) -> Result<f64, FeatureError> {
    let bins = band_slice(psd, lo_hz, hi_hz, 2)?;
    let (mut num, mut den) = (0.0, 0.0);
    for i in bins {
        num += psd.freqs_hz[i] * psd.power[i];
        den += psd.power[i];
    }
    if den <= 0.0 {
        return Err(FeatureError::ZeroBandPower { lo_hz, hi_hz });
    }
    Ok(num / den)
}

/// Negative slope of the least-squares line through `(ln f, ln power)` over
/// `[lo_hz, hi_hz]`.
pub fn fractal_exponent(psd: &Psd, lo_hz: f64, hi_hz: f64) -> Result<f64, FeatureError> {
    let bins = band_slice(psd, lo_hz, hi_hz, 3)?;
    let mut xs = Vec::with_capacity(bins.len());
    let mut ys = Vec::with_capacity(bins.len());
    for i in bins {
        let (f, p) = (psd.freqs_hz[i], psd.power[i]);
        if f <= 0.0 || p <= 0.0 {
            return Err(FeatureError::NonPositivePower { freq_hz: f });
        }
        xs.push(f.ln());
        ys.push(p.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(-sxy / sxx)
}
