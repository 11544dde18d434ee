use super::{check_classes, check_dim, BaselineError};
use crate::dataset::Example;
use crate::signal_io::Label;

pub const LOGREG_TOL: f64 = 1e-6;
pub const LOGREG_MAX_ITER: usize = 10_000;
/// Gradient norm at which iteration stops early. Tighter than
/// [`LOGREG_TOL`] so that restarts land within 1e-5 of each other even when
/// the unpenalized bias direction is flat; only `LOGREG_TOL` is enforced.
pub const LOGREG_TARGET: f64 = 1e-9;

/// Logistic regression for `P(stroke | x)`.
///
/// Fitting minimizes `mean(log(1 + exp(-y z))) + (1 / l2_cost) * |w|^2 / 2`
/// with `y = +1` for Stroke and `-1` for Normal. The bias is not penalized.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2_cost: f64,
}

fn sign(label: Label) -> f64 {
    match label {
        Label::Stroke => 1.0,
        Label::Normal => -1.0,
    }
}

/// `log(1 + exp(t))` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + libm::log1p(libm::exp(-t))
    } else {
        libm::log1p(libm::exp(t))
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + libm::exp(-t))
    } else {
        let e = libm::exp(t);
        e / (1.0 + e)
    }
}

impl LogRegModel {
    fn z(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    /// Regularized objective on `rows`.
    pub fn loss(&self, rows: &[Example]) -> f64 {
        let n = rows.len() as f64;
        let data: f64 = rows.iter().map(|r| softplus(-sign(r.label) * self.z(&r.x))).sum::<f64>() / n;
        let sq: f64 = self.weights.iter().map(|w| w * w).sum();
        data + 0.5 * sq / self.l2_cost
    }

    /// Gradient of [`LogRegModel::loss`]: weights first, bias last.
    pub fn gradient(&self, rows: &[Example]) -> Vec<f64> {
        let n = rows.len() as f64;
        let dim = self.weights.len();
        let mut g = vec![0.0; dim + 1];
        for r in rows {
            let y = sign(r.label);
            let coef = -y * sigmoid(-y * self.z(&r.x)) / n;
            for (gi, v) in g.iter_mut().zip(&r.x) {
                *gi += coef * v;
            }
            g[dim] += coef;
        }
        for (gi, w) in g.iter_mut().zip(&self.weights) {
            *gi += w / self.l2_cost;
        }
        g
    }

    /// Gradient descent from zero weights.
    pub fn fit(rows: &[Example], l2_cost: f64) -> Result<LogRegModel, BaselineError> {
        let dim = rows.first().map_or(0, |r| r.x.len());
        Self::fit_from(rows, l2_cost, vec![0.0; dim], 0.0)
    }

    /// Gradient descent from a given starting point.
    pub fn fit_from(
        rows: &[Example],
        l2_cost: f64,
        weights: Vec<f64>,
        bias: f64,
    ) -> Result<LogRegModel, BaselineError> {
        check_classes(rows)?;
        let dim = check_dim(rows)?;
        if weights.len() != dim {
            return Err(BaselineError::DimensionMismatch {
                expected: dim,
                got: weights.len(),
            });
        }
        let step = 1.0 / lipschitz_bound(rows, l2_cost);
        let mut model = LogRegModel { weights, bias, l2_cost };
        let mut grad_norm = f64::INFINITY;
        for _ in 0..LOGREG_MAX_ITER {
            let g = model.gradient(rows);
            grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if grad_norm <= LOGREG_TARGET {
                return Ok(model);
            }
            for (w, gi) in model.weights.iter_mut().zip(&g) {
                *w -= step * gi;
            }
            model.bias -= step * g[dim];
        }
        let g = model.gradient(rows);
        let final_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if final_norm <= LOGREG_TOL {
            return Ok(model);
        }
        Err(BaselineError::NonConvergence {
            iterations: LOGREG_MAX_ITER,
            grad_norm: grad_norm.min(final_norm),
        })
    }

    /// Predicted class and `P(stroke | x)`; probability 0.5 maps to Normal.
    pub fn predict(&self, x: &[f64]) -> Result<(Label, f64), BaselineError> {
        if x.len() != self.weights.len() {
            return Err(BaselineError::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        let p = sigmoid(self.z(x));
        Ok((if p > 0.5 { Label::Stroke } else { Label::Normal }, p))
    }
}

/// Upper bound on the Hessian's largest eigenvalue:
/// `lambda_max(X'X) / (4n) + 1 / C`, with `X` carrying a bias column.
/// The eigenvalue is taken as the largest Gershgorin row sum.
fn lipschitz_bound(rows: &[Example], l2_cost: f64) -> f64 {
    let dim = rows[0].x.len() + 1;
    let n = rows.len() as f64;
    let mut gram = vec![0.0; dim * dim];
    for r in rows {
        let xa: Vec<f64> = r.x.iter().copied().chain(std::iter::once(1.0)).collect();
        for i in 0..dim {
            for j in 0..dim {
                gram[i * dim + j] += xa[i] * xa[j];
            }
        }
    }
    let lambda = (0..dim)
        .map(|i| (0..dim).map(|j| gram[i * dim + j].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    lambda / (4.0 * n) + 1.0 / l2_cost
}
