use super::{check_classes, check_dim, BaselineError};
use crate::dataset::Example;
use crate::signal_io::Label;

/// Smallest per-feature variance, so constant features stay finite.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with relative-frequency priors.
///
/// Index 0 holds the Normal class, index 1 the Stroke class.
#[derive(Debug, Clone, PartialEq)]
pub struct GnbModel {
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub vars: [Vec<f64>; 2],
}

impl GnbModel {
    pub fn fit(rows: &[Example]) -> Result<GnbModel, BaselineError> {
        check_classes(rows)?;
        let dim = check_dim(rows)?;
        let mut priors = [0.0; 2];
        let mut means = [vec![0.0; dim], vec![0.0; dim]];
        let mut vars = [vec![0.0; dim], vec![0.0; dim]];
        for c in 0..2 {
            let members: Vec<&Example> = rows.iter().filter(|r| r.label.index() == c).collect();
            let n = members.len() as f64;
            priors[c] = n / rows.len() as f64;
            for r in &members {
                for (m, v) in means[c].iter_mut().zip(&r.x) {
                    *m += v;
                }
            }
            means[c].iter_mut().for_each(|m| *m /= n);
            for r in &members {
                for ((s, v), m) in vars[c].iter_mut().zip(&r.x).zip(&means[c]) {
                    *s += (v - m) * (v - m);
                }
            }
            vars[c].iter_mut().for_each(|s| *s = (*s / n).max(VARIANCE_FLOOR));
        }
        Ok(GnbModel { priors, means, vars })
    }

    fn log_joint(&self, c: usize, x: &[f64]) -> f64 {
        let ln_2pi = libm::log(2.0 * std::f64::consts::PI);
        let ll: f64 = x
            .iter()
            .zip(&self.means[c])
            .zip(&self.vars[c])
            .map(|((v, m), s)| -0.5 * (ln_2pi + libm::log(*s) + (v - m) * (v - m) / s))
            .sum();
        libm::log(self.priors[c]) + ll
    }

    /// Predicted class and posterior `[P(normal|x), P(stroke|x)]`.
    /// Exact posterior ties go to Normal.
    pub fn predict(&self, x: &[f64]) -> Result<(Label, [f64; 2]), BaselineError> {
        if x.len() != self.means[0].len() {
            return Err(BaselineError::DimensionMismatch {
                expected: self.means[0].len(),
                got: x.len(),
            });
        }
        let lj = [self.log_joint(0, x), self.log_joint(1, x)];
        let max = lj[0].max(lj[1]);
        let e = [libm::exp(lj[0] - max), libm::exp(lj[1] - max)];
        let sum = e[0] + e[1];
        let post = [e[0] / sum, e[1] / sum];
        let label = if lj[1] > lj[0] { Label::Stroke } else { Label::Normal };
        Ok((label, post))
    }
}
