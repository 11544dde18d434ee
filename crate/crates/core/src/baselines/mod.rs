//! Shallow comparison classifiers: Gaussian naive Bayes, k-nearest
//! neighbours and L2-regularized logistic regression.

mod gnb;
mod knn;
mod logreg;

use thiserror::Error;

use crate::dataset::Example;
use crate::signal_io::Label;

pub use gnb::{GnbModel, VARIANCE_FLOOR};
pub use knn::{KnnModel, DEFAULT_K};
pub use logreg::{LogRegModel, LOGREG_MAX_ITER, LOGREG_TARGET, LOGREG_TOL};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("no training examples of class {0}")]
    MissingClass(Label),
    #[error("model has no stored examples")]
    EmptyModel,
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no convergence after {iterations} iterations (gradient norm {grad_norm:.3e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },
}

/// Per-feature z-scoring fitted on a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation; zero-spread features get scale 1.
    pub fn fit(rows: &[Example]) -> Standardizer {
        let dim = rows.first().map_or(0, |r| r.x.len());
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(&r.x) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(&r.x).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        let scale = var
            .into_iter()
            .map(|v| if v > 0.0 { v.sqrt() } else { 1.0 })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn transform_example(&self, e: &Example) -> Example {
        Example::new(self.transform(&e.x), e.label)
    }
}

pub(crate) fn check_classes(rows: &[Example]) -> Result<(), BaselineError> {
    for label in [Label::Normal, Label::Stroke] {
        if !rows.iter().any(|r| r.label == label) {
            return Err(BaselineError::MissingClass(label));
        }
    }
    Ok(())
}

pub(crate) fn check_dim(rows: &[Example]) -> Result<usize, BaselineError> {
    let dim = rows.first().map_or(0, |r| r.x.len());
    for r in rows {
        if r.x.len() != dim {
            return Err(BaselineError::DimensionMismatch {
                expected: dim,
                got: r.x.len(),
            });
        }
    }
    Ok(dim)
}
