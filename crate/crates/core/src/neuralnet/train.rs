use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{NetError, Network};
use crate::dataset::Example;
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EarlyStop {
    /// Always run every epoch.
    #[default]
    Disabled,
    /// Stop at the first epoch whose model classifies the held-out example
    /// correctly. This reads the test example during training.
    PaperFaithful,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub shuffle: bool,
    pub early_stop: EarlyStop,
    /// Seeds the mini-batch shuffling.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 8,
            learning_rate: 0.05,
            shuffle: true,
            early_stop: EarlyStop::Disabled,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        if self.epochs == 0 {
            return Err(NetError::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(NetError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(NetError::InvalidConfig(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean mini-batch loss of each completed epoch.
    pub epoch_losses: Vec<f64>,
    /// 1-based epoch at which early stopping fired.
    pub stop_epoch: Option<usize>,
}

/// Splits `order` into mini-batches; a trailing batch of one example is
/// merged into its predecessor so batch normalization always sees two.
fn batches(order: &[usize], batch_size: usize) -> Vec<&[usize]> {
    let mut out: Vec<&[usize]> = order.chunks(batch_size).collect();
    if out.len() > 1 && out.last().map(|b| b.len()) == Some(1) {
        out.pop();
        let start = (out.len() - 1) * batch_size;
        *out.last_mut().expect("at least one batch") = &order[start..];
    }
    out
}

/// Mini-batch SGD on `train_set`. `test_example` is only read when
/// `cfg.early_stop` is [`EarlyStop::PaperFaithful`].
pub fn train(
    net: &mut Network,
    train_set: &[Example],
    test_example: Option<&Example>,
    cfg: &TrainConfig,
) -> Result<TrainHistory, NetError> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(NetError::EmptyTrainSet);
    }
    let mut rng = seeded(cfg.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = TrainHistory::default();

    for epoch in 1..=cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        let mut count = 0;
        for idx in batches(&order, cfg.batch_size) {
            let batch: Vec<&Example> = idx.iter().map(|&i| &train_set[i]).collect();
            total += net.backward_and_update(&batch, cfg.learning_rate)?;
            count += 1;
        }
        history.epoch_losses.push(total / count as f64);

        if let (EarlyStop::PaperFaithful, Some(test)) = (cfg.early_stop, test_example) {
            if net.predict(&test.x)? == test.label {
                history.stop_epoch = Some(epoch);
                break;
            }
        }
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralnet::{build_paper_cnn, build_paper_mlp};
    use crate::signal_io::Label;
    use rand::Rng;

    fn separable(n: usize, seed: u64) -> Vec<Example> {
        let mut rng = seeded(seed);
        (0..n)
            .map(|i| {
                let label = if i % 2 == 0 { Label::Normal } else { Label::Stroke };
                let s = if label == Label::Stroke { 1.0 } else { -1.0 };
                let x = (0..24).map(|j| s * (0.5 + 0.02 * j as f64) + rng.random_range(-0.3..0.3)).collect();
                Example::new(x, label)
            })
            .collect()
    }

    #[test]
    fn batch_partition() {
        let order: Vec<usize> = (0..17).collect();
        let b = batches(&order, 8);
        assert_eq!(b.iter().map(|x| x.len()).collect::<Vec<_>>(), vec![8, 9]);
        let order: Vec<usize> = (0..61).collect();
        let sizes: Vec<usize> = batches(&order, 8).iter().map(|x| x.len()).collect();
        assert_eq!(sizes, vec![8, 8, 8, 8, 8, 8, 8, 5]);
        assert_eq!(batches(&order[..1], 8).len(), 1);
    }

    #[test]
    fn runs_every_epoch_without_early_stop() {
        let data = separable(20, 1);
        let mut net = build_paper_cnn(1);
        let cfg = TrainConfig { epochs: 7, ..TrainConfig::default() };
        let h = train(&mut net, &data, Some(&data[0]), &cfg).unwrap();
        assert_eq!(h.epoch_losses.len(), 7);
        assert_eq!(h.stop_epoch, None);
    }

    #[test]
    fn paper_faithful_stops_on_first_correct_epoch() {
        let data = separable(20, 2);
        let cfg = TrainConfig {
            epochs: 50,
            early_stop: EarlyStop::PaperFaithful,
            ..TrainConfig::default()
        };
        // find what the epoch-1 model predicts, then hand it a test example
        // carrying that label
        let mut probe = build_paper_cnn(3);
        train(&mut probe, &data, None, &TrainConfig { epochs: 1, ..cfg.clone() }).unwrap();
        let x = data[0].x.clone();
        let label = probe.predict(&x).unwrap();
        let mut net = build_paper_cnn(3);
        let h = train(&mut net, &data, Some(&Example::new(x, label)), &cfg).unwrap();
        assert_eq!(h.stop_epoch, Some(1));
        assert_eq!(h.epoch_losses.len(), 1);
    }

    #[test]
    fn deterministic_given_seed() {
        let data = separable(24, 4);
        let cfg = TrainConfig { epochs: 5, seed: 9, ..TrainConfig::default() };
        let mut a = build_paper_cnn(5);
        let mut b = build_paper_cnn(5);
        let ha = train(&mut a, &data, None, &cfg).unwrap();
        let hb = train(&mut b, &data, None, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
    }

    #[test]
    fn loss_falls_on_separable_data() {
        let data = separable(30, 6);
        for mut net in [build_paper_cnn(6), build_paper_mlp(6)] {
            let cfg = TrainConfig { epochs: 30, ..TrainConfig::default() };
            let h = train(&mut net, &data, None, &cfg).unwrap();
            assert!(h.epoch_losses.last().unwrap() < &h.epoch_losses[0]);
            let correct = data.iter().filter(|e| net.predict(&e.x).unwrap() == e.label).count();
            assert_eq!(correct, data.len());
        }
    }

    #[test]
    fn config_validation() {
        let mut net = build_paper_mlp(0);
        let data = separable(4, 0);
        for cfg in [
            TrainConfig { epochs: 0, ..TrainConfig::default() },
            TrainConfig { batch_size: 0, ..TrainConfig::default() },
            TrainConfig { learning_rate: -1.0, ..TrainConfig::default() },
        ] {
            assert!(matches!(train(&mut net, &data, None, &cfg), Err(NetError::InvalidConfig(_))));
        }
        assert!(matches!(
            train(&mut net, &[], None, &TrainConfig::default()),
            Err(NetError::EmptyTrainSet)
        ));
    }

    #[test]
    fn divergence_is_reported() {
        let mut data = separable(8, 0);
        data[0].x[0] = 1e300;
        let mut net = build_paper_mlp(0);
        let cfg = TrainConfig { epochs: 3, learning_rate: 1e6, ..TrainConfig::default() };
        assert!(matches!(train(&mut net, &data, None, &cfg), Err(NetError::NonFiniteLoss)));
    }
}
