//! Brain symmetry index.
//!
//! For `M` homologous channel pairs and the `N` PSD bins between 1 and 25 Hz:
//!
//! ```text
//! BSI = 1/M * sum_j | 1/N * sum_i (R_ij - L_ij) / (R_ij + L_ij) |
//! ```
//!
//! The denominator is the sum of the two hemispheric powers. With a
//! difference in the denominator every ratio would be identically one, so the
//! normalized-difference form is the only one that yields 0 for a symmetric
//! brain.

use serde::{Deserialize, Serialize};

use super::{FeatureError, Psd};

pub const BSI_LO_HZ: f64 = 1.0;
pub const BSI_HI_HZ: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsiResult {
    pub value: f64,
    pub n_freq_bins: usize,
    pub n_pairs: usize,
}

pub fn brain_symmetry_index(left: &[Psd], right: &[Psd]) -> Result<BsiResult, FeatureError> {
    if left.len() != right.len() || left.is_empty() {
        return Err(FeatureError::PairCountMismatch {
            left: left.len(),
            right: right.len(),
        });
    }
    let mut total = 0.0;
    let mut n_bins = 0;
    for (l, r) in left.iter().zip(right) {
        if l.resolution_hz != r.resolution_hz {
            return Err(FeatureError::GridMismatch);
        }
        for psd in [l, r] {
            if psd.max_freq() < BSI_HI_HZ {
                return Err(FeatureError::BandNotCovered {
                    lo_hz: BSI_LO_HZ,
                    hi_hz: BSI_HI_HZ,
                });
            }
        }
        let bins = l.bins_in(BSI_LO_HZ, BSI_HI_HZ);
        if bins.is_empty() {
            return Err(FeatureError::BandNotCovered {
                lo_hz: BSI_LO_HZ,
                hi_hz: BSI_HI_HZ,
            });
        }
        n_bins = bins.len();
        let mut acc = 0.0;
        for i in bins {
            let (rp, lp) = (r.power[i], l.power[i]);
            let den = rp + lp;
            if den <= 0.0 {
                return Err(FeatureError::DegenerateBin { freq_hz: l.freqs_hz[i] });
            }
            acc += (rp - lp) / den;
        }
        total += (acc / n_bins as f64).abs();
    }
    Ok(BsiResult {
        value: total / left.len() as f64,
        n_freq_bins: n_bins,
        n_pairs: left.len(),
    })
}
