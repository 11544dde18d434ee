use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{BaselineError, GnbModel, KnnModel, LogRegModel, Standardizer, DEFAULT_K};
use crate::dataset::Example;
use crate::neuralnet::{build_paper_cnn, build_paper_mlp, train, EarlyStop, NetError, Network, TrainConfig};
use crate::rng::derive_seed;
use crate::signal_io::Label;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

/// What to train in each round. Everything except GNB and the constant
/// predictor sees z-scored features (fitted on the training rows only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Cnn { train: TrainConfig },
    Mlp { train: TrainConfig },
    Gnb,
    Knn { k: usize },
    LogReg { l2_cost: f64 },
    Constant { label: Label },
}

impl ClassifierSpec {
    pub fn cnn(epochs: usize) -> ClassifierSpec {
        ClassifierSpec::Cnn {
            train: TrainConfig { epochs, ..TrainConfig::default() },
        }
    }

    pub fn mlp(epochs: usize) -> ClassifierSpec {
        ClassifierSpec::Mlp {
            train: TrainConfig { epochs, ..TrainConfig::default() },
        }
    }

    pub fn knn() -> ClassifierSpec {
        ClassifierSpec::Knn { k: DEFAULT_K }
    }

    pub fn logreg() -> ClassifierSpec {
        ClassifierSpec::LogReg { l2_cost: 1.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Cnn { .. } => "cnn",
            ClassifierSpec::Mlp { .. } => "mlp",
            ClassifierSpec::Gnb => "gnb",
            ClassifierSpec::Knn { .. } => "knn",
            ClassifierSpec::LogReg { .. } => "logreg",
            ClassifierSpec::Constant { .. } => "constant",
        }
    }

    /// True when the held-out example is handed to the trainer.
    pub fn reads_test_example(&self) -> bool {
        matches!(
            self,
            ClassifierSpec::Cnn { train } | ClassifierSpec::Mlp { train }
                if train.early_stop == EarlyStop::PaperFaithful
        )
    }
}

#[derive(Debug, Clone)]
pub enum FittedClassifier {
    Net(Standardizer, Network),
    Gnb(GnbModel),
    Knn(Standardizer, KnnModel),
    LogReg(Standardizer, LogRegModel),
    Constant(Label),
}

impl FittedClassifier {
    /// Predicted label and, where the model has one, `P(stroke | x)`.
    pub fn predict(&self, x: &[f64]) -> Result<(Label, Option<f64>), ClassifierError> {
        Ok(match self {
            FittedClassifier::Net(s, net) => {
                let z = s.transform(x);
                let p = net.forward(&z)?;
                (net.predict(&z)?, Some(p[1]))
            }
            FittedClassifier::Gnb(m) => {
                let (label, post) = m.predict(x)?;
                (label, Some(post[1]))
            }
            FittedClassifier::Knn(s, m) => (m.predict(&s.transform(x))?, None),
            FittedClassifier::LogReg(s, m) => {
                let (label, p) = m.predict(&s.transform(x))?;
                (label, Some(p))
            }
            FittedClassifier::Constant(label) => (*label, None),
        })
    }
}

/// Trains `spec` on `train_rows`. `test` is only forwarded to the trainer in
/// [`EarlyStop::PaperFaithful`] mode. Returns the model and the stop epoch.
pub fn fit_classifier(
    spec: &ClassifierSpec,
    train_rows: &[Example],
    test: Option<&Example>,
    seed: u64,
) -> Result<(FittedClassifier, Option<usize>), ClassifierError> {
    let standardized = |rows: &[Example]| {
        let s = Standardizer::fit(rows);
        let z: Vec<Example> = rows.iter().map(|e| s.transform_example(e)).collect();
        (s, z)
    };
    match spec {
        ClassifierSpec::Cnn { train: cfg } | ClassifierSpec::Mlp { train: cfg } => {
            let (s, z) = standardized(train_rows);
            let mut net = match spec {
                ClassifierSpec::Cnn { .. } => build_paper_cnn(derive_seed(seed, 0)),
                _ => build_paper_mlp(derive_seed(seed, 0)),
            };
            let cfg = TrainConfig {
                seed: derive_seed(seed, 1),
                ..cfg.clone()
            };
            let z_test = match (cfg.early_stop, test) {
                (EarlyStop::PaperFaithful, Some(t)) => Some(s.transform_example(t)),
                _ => None,
            };
            let history = train(&mut net, &z, z_test.as_ref(), &cfg)?;
            Ok((FittedClassifier::Net(s, net), history.stop_epoch))
        }
        ClassifierSpec::Gnb => Ok((FittedClassifier::Gnb(GnbModel::fit(train_rows)?), None)),
        ClassifierSpec::Knn { k } => {
            let (s, z) = standardized(train_rows);
            Ok((FittedClassifier::Knn(s, KnnModel::fit(&z, *k)?), None))
        }
        ClassifierSpec::LogReg { l2_cost } => {
            let (s, z) = standardized(train_rows);
            Ok((FittedClassifier::LogReg(s, LogRegModel::fit(&z, *l2_cost)?), None))
        }
        ClassifierSpec::Constant { label } => Ok((FittedClassifier::Constant(*label), None)),
    }
}
