use super::layers::{Activation, BatchNormLayer, BnCache, ConvLayer, DenseLayer, Layer, Mode, SubsampleLayer};
use super::{softmax, NetError, Shape, Tensor1d};
use crate::dataset::Example;
use crate::rng::seeded;
use crate::signal_io::Label;

/// L2 factor of the MLP baseline.
pub const PAPER_MLP_L2: f64 = 0.1;

const BN_EPS: f64 = 1e-5;
const BN_MOMENTUM: f64 = 0.9;

/// Feed-forward classifier ending in a 2-way softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub input_shape: Shape,
    pub layers: Vec<Layer>,
    pub rng_seed: u64,
    /// L2 weight-decay factor; the penalty is `l2 * |W|^2 / (2 * batch_len)`.
    pub l2: f64,
}

/// Per-layer inputs of a batch forward pass plus the final logits.
struct Trace {
    acts: Vec<Vec<Tensor1d>>,
    caches: Vec<Option<BnCache>>,
}

impl Network {
    pub fn new(input_shape: Shape, layers: Vec<Layer>, rng_seed: u64, l2: f64) -> Result<Network, NetError> {
        let net = Network {
            input_shape,
            layers,
            rng_seed,
            l2,
        };
        let trace = net.shape_trace()?;
        let out = *trace.last().unwrap_or(&input_shape);
        if out.0 * out.1 != 2 {
            return Err(NetError::BadOutput(out));
        }
        Ok(net)
    }

    /// Output shape after every layer.
    pub fn shape_trace(&self) -> Result<Vec<Shape>, NetError> {
        let mut shape = self.input_shape;
        self.layers
            .iter()
            .map(|l| {
                shape = l.output_shape(shape)?;
                Ok(shape)
            })
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.params())
            .map(|p| p.len())
            .sum()
    }

    /// All trainable arrays, layer by layer.
    pub fn param_groups(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn param_groups_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    fn input_tensor(&self, x: &[f64]) -> Result<Tensor1d, NetError> {
        let (maps, length) = self.input_shape;
        if x.len() != maps * length {
            return Err(NetError::ShapeMismatch {
                layer: "input",
                expected: format!("{} values", maps * length),
                got: (1, x.len()),
            });
        }
        Ok(Tensor1d::from_vec(maps, length, x.to_vec()))
    }

    /// Inference-mode class probabilities `[p_normal, p_stroke]`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        let mut t = self.input_tensor(x)?;
        for layer in &self.layers {
            t = layer.forward_one(&t)?;
        }
        Ok(softmax(&t.data))
    }

    /// Inference-mode activations after every layer, input first.
    pub fn forward_trace(&self, x: &[f64]) -> Result<Vec<Tensor1d>, NetError> {
        let mut out = vec![self.input_tensor(x)?];
        for layer in &self.layers {
            let next = layer.forward_one(out.last().expect("non-empty"))?;
            out.push(next);
        }
        Ok(out)
    }

    /// Most probable class; ties go to [`Label::Normal`].
    pub fn predict(&self, x: &[f64]) -> Result<Label, NetError> {
        let p = self.forward(x)?;
        Ok(if p[1] > p[0] { Label::Stroke } else { Label::Normal })
    }

    fn forward_train(&self, batch: &[&Example]) -> Result<Trace, NetError> {
        if batch.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        let input = batch
            .iter()
            .map(|e| self.input_tensor(&e.x))
            .collect::<Result<Vec<_>, _>>()?;
        let mut acts = vec![input];
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (out, cache) = layer.forward_batch(acts.last().expect("non-empty"), Mode::Train)?;
            acts.push(out);
            caches.push(cache);
        }
        Ok(Trace { acts, caches })
    }

    fn l2_penalty(&self, batch_len: usize) -> f64 {
        if self.l2 == 0.0 {
            return 0.0;
        }
        let sq: f64 = self
            .layers
            .iter()
            .filter_map(|l| l.decayed())
            .flat_map(|w| w.iter())
            .map(|w| w * w)
            .sum();
        self.l2 * sq / (2.0 * batch_len as f64)
    }

    fn data_loss(trace: &Trace, batch: &[&Example]) -> f64 {
        let logits = trace.acts.last().expect("non-empty");
        let total: f64 = logits
            .iter()
            .zip(batch)
            .map(|(z, e)| -libm::log(softmax(&z.data)[e.label.index()]))
            .sum();
        total / batch.len() as f64
    }

    /// Training-mode loss (batch statistics in batch normalization),
    /// without touching any state.
    pub fn batch_loss(&self, batch: &[&Example]) -> Result<f64, NetError> {
        let trace = self.forward_train(batch)?;
        Ok(Self::data_loss(&trace, batch) + self.l2_penalty(batch.len()))
    }

    /// Loss and gradients aligned with [`Network::param_groups`].
    pub fn gradients(&self, batch: &[&Example]) -> Result<(f64, Vec<Vec<f64>>), NetError> {
        let (loss, grads, _) = self.gradients_with_stats(batch)?;
        Ok((loss, grads))
    }

    fn gradients_with_stats(&self, batch: &[&Example]) -> Result<(f64, Vec<Vec<f64>>, Vec<Option<BnCache>>), NetError> {
        let trace = self.forward_train(batch)?;
        let m = batch.len() as f64;
        let loss = Self::data_loss(&trace, batch) + self.l2_penalty(batch.len());

        let logits = trace.acts.last().expect("non-empty");
        let mut grad: Vec<Tensor1d> = logits
            .iter()
            .zip(batch)
            .map(|(z, e)| {
                let mut p = softmax(&z.data);
                p[e.label.index()] -= 1.0;
                p.iter_mut().for_each(|v| *v /= m);
                Tensor1d::from_vec(z.maps, z.length, p)
            })
            .collect();

        let mut per_layer: Vec<Vec<Vec<f64>>> = self
            .layers
            .iter()
            .map(|l| l.params().iter().map(|p| vec![0.0; p.len()]).collect())
            .collect();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            grad = layer.backward_batch(
                &trace.acts[i],
                &trace.acts[i + 1],
                trace.caches[i].as_ref(),
                &grad,
                &mut per_layer[i],
            );
            if self.l2 != 0.0 {
                if let Some(w) = layer.decayed() {
                    let scale = self.l2 / m;
                    for (g, wv) in per_layer[i][0].iter_mut().zip(w) {
                        *g += scale * wv;
                    }
                }
            }
        }
        Ok((loss, per_layer.into_iter().flatten().collect(), trace.caches))
    }

    /// One SGD step. Returns the loss before the update.
    pub fn backward_and_update(&mut self, batch: &[&Example], lr: f64) -> Result<f64, NetError> {
        let (loss, grads, caches) = self.gradients_with_stats(batch)?;
        if !loss.is_finite() {
            return Err(NetError::NonFiniteLoss);
        }
        for (layer, cache) in self.layers.iter_mut().zip(&caches) {
            if let (Layer::BatchNorm(bn), Some(c)) = (layer, cache) {
                bn.update_running(c);
            }
        }
        if lr != 0.0 {
            for (p, g) in self.param_groups_mut().into_iter().zip(&grads) {
                for (pv, gv) in p.iter_mut().zip(g) {
                    *pv -= lr * gv;
                }
            }
        }
        Ok(loss)
    }

    /// One-line architecture summary, e.g. `conv(1->20,k5) subsample(2) ...`.
    pub fn describe(&self) -> String {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Conv(c) => format!("conv({}->{},k{})", c.in_maps, c.out_maps, c.kernel_len),
                Layer::Subsample(s) => format!("subsample({})", s.factor),
                Layer::BatchNorm(b) => format!("batchnorm({})", b.units),
                Layer::Dense(d) => format!("dense({}->{})", d.in_units, d.out_units),
                other => other.kind().to_string(),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// conv(1->20,k5) -> subsample(2) -> tanh -> conv(20->12,k3) -> subsample(2)
/// -> tanh -> flatten(48) -> batchnorm(48) -> tanh -> dense(48->2).
pub fn build_paper_cnn(seed: u64) -> Network {
    let mut rng = seeded(seed);
    let layers = vec![
        Layer::Conv(ConvLayer::new(1, 20, 5, &mut rng)),
        Layer::Subsample(SubsampleLayer { factor: 2 }),
        Layer::Activation(Activation::Tanh),
        Layer::Conv(ConvLayer::new(20, 12, 3, &mut rng)),
        Layer::Subsample(SubsampleLayer { factor: 2 }),
        Layer::Activation(Activation::Tanh),
        Layer::Flatten,
        Layer::BatchNorm(BatchNormLayer::new(48, BN_EPS, BN_MOMENTUM)),
        Layer::Activation(Activation::Tanh),
        Layer::Dense(DenseLayer::new(48, 2, &mut rng)),
    ];
    Network::new((1, 24), layers, seed, 0.0).expect("fixed CNN shapes compose")
}

/// dense(24->200) -> tanh -> dense(200->2) with L2 factor 0.1.
pub fn build_paper_mlp(seed: u64) -> Network {
    let mut rng = seeded(seed);
    let layers = vec![
        Layer::Dense(DenseLayer::new(24, 200, &mut rng)),
        Layer::Activation(Activation::Tanh),
        Layer::Dense(DenseLayer::new(200, 2, &mut rng)),
    ];
    Network::new((1, 24), layers, seed, PAPER_MLP_L2).expect("fixed MLP shapes compose")
}
