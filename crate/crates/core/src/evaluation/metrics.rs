use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::signal_io::Label;

/// Counts with respect to a chosen positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn record(&mut self, truth: Label, predicted: Label, positive: Label) {
        match (truth == positive, predicted == positive) {
            (true, true) => self.tp += 1,
            (true, false) => self.fn_ += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>, positive: Label) -> ConfusionMatrix {
        let mut cm = ConfusionMatrix::default();
        for (truth, predicted) in pairs {
            cm.record(truth, predicted, positive);
        }
        cm
    }
}

/// The six reported metrics; `None` marks a ratio with a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub f1: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

pub const METRIC_NAMES: [&str; 6] = ["accuracy", "sensitivity", "specificity", "f1", "precision", "recall"];

impl MetricSet {
    /// Values in [`METRIC_NAMES`] order.
    pub fn values(&self) -> [Option<f64>; 6] {
        [
            self.accuracy,
            self.sensitivity,
            self.specificity,
            self.f1,
            self.precision,
            self.recall,
        ]
    }

    pub fn from_values(v: [Option<f64>; 6]) -> MetricSet {
        MetricSet {
            accuracy: v[0],
            sensitivity: v[1],
            specificity: v[2],
            f1: v[3],
            precision: v[4],
            recall: v[5],
        }
    }

    pub fn undefined_count(&self) -> usize {
        self.values().iter().filter(|v| v.is_none()).count()
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricSet, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let sensitivity = ratio(cm.tp, cm.tp + cm.fn_);
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let f1 = match (precision, sensitivity) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Ok(MetricSet {
        accuracy: ratio(cm.tp + cm.tn, total),
        sensitivity,
        specificity: ratio(cm.tn, cm.tn + cm.fp),
        f1,
        precision,
        recall: sensitivity,
    })
}

/// Per-metric mean over the defined values, and how many were undefined.
pub fn mean_metrics(sets: &[MetricSet]) -> (MetricSet, [usize; 6]) {
    let mut out = [None; 6];
    let mut missing = [0; 6];
    for (k, slot) in out.iter_mut().enumerate() {
        let vals: Vec<f64> = sets.iter().filter_map(|s| s.values()[k]).collect();
        missing[k] = sets.len() - vals.len();
        if !vals.is_empty() {
            *slot = Some(vals.iter().sum::<f64>() / vals.len() as f64);
        }
    }
    (MetricSet::from_values(out), missing)
}
