use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{NetError, Shape, Tensor1d};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => libm::tanh(x),
            Activation::Sigmoid => 1.0 / (1.0 + libm::exp(-x)),
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        }
    }
}

/// Glorot-uniform draw in `±sqrt(6 / (fan_in + fan_out))`.
pub(crate) fn glorot<R: Rng>(rng: &mut R, n: usize, fan_in: usize, fan_out: usize) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.random_range(-limit..limit)).collect()
}

/// Valid 1D cross-correlation over all input maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvLayer {
    pub in_maps: usize,
    pub out_maps: usize,
    pub kernel_len: usize,
    /// `[out][in][k]`, row-major.
    pub kernels: Vec<f64>,
    pub biases: Vec<f64>,
}

impl ConvLayer {
    pub fn new<R: Rng>(in_maps: usize, out_maps: usize, kernel_len: usize, rng: &mut R) -> ConvLayer {
        ConvLayer {
            in_maps,
            out_maps,
            kernel_len,
            kernels: glorot(
                rng,
                out_maps * in_maps * kernel_len,
                in_maps * kernel_len,
                out_maps * kernel_len,
            ),
            biases: vec![0.0; out_maps],
        }
    }

    fn kernel(&self, o: usize, i: usize) -> &[f64] {
        let start = (o * self.in_maps + i) * self.kernel_len;
        &self.kernels[start..start + self.kernel_len]
    }

    pub fn forward(&self, input: &Tensor1d) -> Result<Tensor1d, NetError> {
        if input.maps != self.in_maps || input.length < self.kernel_len {
            return Err(NetError::ShapeMismatch {
                layer: "conv",
                expected: format!("({}, >={})", self.in_maps, self.kernel_len),
                got: input.shape(),
            });
        }
        let out_len = input.length - self.kernel_len + 1;
        let mut out = Tensor1d::zeros(self.out_maps, out_len);
        for o in 0..self.out_maps {
            let dst = out.map_mut(o);
            dst.iter_mut().for_each(|v| *v = self.biases[o]);
            for i in 0..self.in_maps {
                let src = input.map(i);
                for (k, w) in self.kernel(o, i).iter().enumerate() {
                    for (d, s) in dst.iter_mut().zip(&src[k..k + out_len]) {
                        *d += w * s;
                    }
                }
            }
        }
        Ok(out)
    }

    fn backward(&self, input: &Tensor1d, grad_out: &Tensor1d, dk: &mut [f64], db: &mut [f64]) -> Tensor1d {
        let out_len = grad_out.length;
        let mut grad_in = Tensor1d::zeros(self.in_maps, input.length);
        for o in 0..self.out_maps {
            let g = grad_out.map(o);
            db[o] += g.iter().sum::<f64>();
            for i in 0..self.in_maps {
                let src = input.map(i);
                let base = (o * self.in_maps + i) * self.kernel_len;
                for k in 0..self.kernel_len {
                    let w = self.kernels[base + k];
                    let window = &src[k..k + out_len];
                    dk[base + k] += g.iter().zip(window).map(|(a, b)| a * b).sum::<f64>();
                    let gi = &mut grad_in.map_mut(i)[k..k + out_len];
                    for (d, a) in gi.iter_mut().zip(g) {
                        *d += w * a;
                    }
                }
            }
        }
        grad_in
    }
}

/// Average pooling over non-overlapping windows of `factor` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsampleLayer {
    pub factor: usize,
}

impl SubsampleLayer {
    pub fn forward(&self, input: &Tensor1d) -> Result<Tensor1d, NetError> {
        if self.factor == 0 || input.length % self.factor != 0 {
            return Err(NetError::OddLength {
                length: input.length,
                factor: self.factor,
            });
        }
        let out_len = input.length / self.factor;
        let scale = 1.0 / self.factor as f64;
        let mut out = Tensor1d::zeros(input.maps, out_len);
        for m in 0..input.maps {
            let src = input.map(m);
            for (d, chunk) in out.map_mut(m).iter_mut().zip(src.chunks_exact(self.factor)) {
                *d = chunk.iter().sum::<f64>() * scale;
            }
        }
        Ok(out)
    }

    fn backward(&self, grad_out: &Tensor1d) -> Tensor1d {
        let scale = 1.0 / self.factor as f64;
        let mut grad_in = Tensor1d::zeros(grad_out.maps, grad_out.length * self.factor);
        for (d, g) in grad_in.data.chunks_exact_mut(self.factor).zip(&grad_out.data) {
            d.iter_mut().for_each(|v| *v = g * scale);
        }
        grad_in
    }
}

/// Per-unit batch normalization with learned scale `gamma` and shift `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNormLayer {
    pub units: usize,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub eps: f64,
    pub momentum: f64,
    /// `(mean, var)` used at inference; `None` until set or trained.
    pub running: Option<(Vec<f64>, Vec<f64>)>,
}

/// Batch statistics and normalized activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct BnCache {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    inv_std: Vec<f64>,
    x_hat: Vec<Vec<f64>>,
}

impl BatchNormLayer {
    /// gamma = 1, beta = 0, running statistics (0, 1).
    pub fn new(units: usize, eps: f64, momentum: f64) -> BatchNormLayer {
        BatchNormLayer {
            units,
            gamma: vec![1.0; units],
            beta: vec![0.0; units],
            eps,
            momentum,
            running: Some((vec![0.0; units], vec![1.0; units])),
        }
    }

    /// Layer with no running statistics; inference fails until training sets them.
    pub fn without_stats(units: usize, eps: f64, momentum: f64) -> BatchNormLayer {
        BatchNormLayer {
            running: None,
            ..BatchNormLayer::new(units, eps, momentum)
        }
    }

    fn check(&self, x: &Tensor1d) -> Result<(), NetError> {
        if x.data.len() != self.units {
            return Err(NetError::ShapeMismatch {
                layer: "batchnorm",
                expected: format!("{} units", self.units),
                got: x.shape(),
            });
        }
        Ok(())
    }

    /// Training-mode forward using the statistics of `batch`.
    pub fn forward_train(&self, batch: &[Tensor1d]) -> Result<(Vec<Tensor1d>, BnCache), NetError> {
        let m = batch.len();
        if m < 2 {
            return Err(NetError::BatchTooSmall(m));
        }
        for x in batch {
            self.check(x)?;
        }
        let mf = m as f64;
        let mut mean = vec![0.0; self.units];
        for x in batch {
            for (a, v) in mean.iter_mut().zip(&x.data) {
                *a += v;
            }
        }
        mean.iter_mut().for_each(|a| *a /= mf);
        let mut var = vec![0.0; self.units];
        for x in batch {
            for ((a, v), mu) in var.iter_mut().zip(&x.data).zip(&mean) {
                *a += (v - mu) * (v - mu);
            }
        }
        var.iter_mut().for_each(|a| *a /= mf);
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + self.eps).sqrt()).collect();

        let mut outs = Vec::with_capacity(m);
        let mut x_hat = Vec::with_capacity(m);
        for x in batch {
            let xh: Vec<f64> = x
                .data
                .iter()
                .zip(&mean)
                .zip(&inv_std)
                .map(|((v, mu), s)| (v - mu) * s)
                .collect();
            let y = xh
                .iter()
                .zip(&self.gamma)
                .zip(&self.beta)
                .map(|((h, g), b)| g * h + b)
                .collect();
            outs.push(Tensor1d::from_vec(x.maps, x.length, y));
            x_hat.push(xh);
        }
        Ok((outs, BnCache { mean, var, inv_std, x_hat }))
    }

    /// Inference-mode forward using the running statistics.
    pub fn forward_infer(&self, x: &Tensor1d) -> Result<Tensor1d, NetError> {
        self.check(x)?;
        let (rm, rv) = self.running.as_ref().ok_or(NetError::UninitializedStats)?;
        let y = x
            .data
            .iter()
            .enumerate()
            .map(|(u, v)| self.gamma[u] * (v - rm[u]) / (rv[u] + self.eps).sqrt() + self.beta[u])
            .collect();
        Ok(Tensor1d::from_vec(x.maps, x.length, y))
    }

    /// Folds batch statistics into the running averages.
    pub fn update_running(&mut self, cache: &BnCache) {
        let mom = self.momentum;
        let (rm, rv) = self
            .running
            .get_or_insert_with(|| (cache.mean.clone(), cache.var.clone()));
        for (r, b) in rm.iter_mut().zip(&cache.mean) {
            *r = mom * *r + (1.0 - mom) * b;
        }
        for (r, b) in rv.iter_mut().zip(&cache.var) {
            *r = mom * *r + (1.0 - mom) * b;
        }
    }

    fn backward(&self, cache: &BnCache, grad_out: &[Tensor1d], dgamma: &mut [f64], dbeta: &mut [f64]) -> Vec<Tensor1d> {
        let m = grad_out.len() as f64;
        let mut sum_dxh = vec![0.0; self.units];
        let mut sum_dxh_xh = vec![0.0; self.units];
        for (g, xh) in grad_out.iter().zip(&cache.x_hat) {
            for u in 0..self.units {
                dgamma[u] += g.data[u] * xh[u];
                dbeta[u] += g.data[u];
                let dxh = g.data[u] * self.gamma[u];
                sum_dxh[u] += dxh;
                sum_dxh_xh[u] += dxh * xh[u];
            }
        }
        grad_out
            .iter()
            .zip(&cache.x_hat)
            .map(|(g, xh)| {
                let d = (0..self.units)
                    .map(|u| {
                        let dxh = g.data[u] * self.gamma[u];
                        cache.inv_std[u] / m * (m * dxh - sum_dxh[u] - xh[u] * sum_dxh_xh[u])
                    })
                    .collect();
                Tensor1d::from_vec(g.maps, g.length, d)
            })
            .collect()
    }
}

/// Fully connected layer over the flattened input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub in_units: usize,
    pub out_units: usize,
    /// `[out][in]`, row-major.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    pub fn new<R: Rng>(in_units: usize, out_units: usize, rng: &mut R) -> DenseLayer {
        DenseLayer {
            in_units,
            out_units,
            weights: glorot(rng, in_units * out_units, in_units, out_units),
            biases: vec![0.0; out_units],
        }
    }

    pub fn forward(&self, input: &Tensor1d) -> Result<Tensor1d, NetError> {
        if input.data.len() != self.in_units {
            return Err(NetError::ShapeMismatch {
                layer: "dense",
                expected: format!("{} units", self.in_units),
                got: input.shape(),
            });
        }
        let out = self
            .weights
            .chunks_exact(self.in_units)
            .zip(&self.biases)
            .map(|(row, b)| b + row.iter().zip(&input.data).map(|(w, x)| w * x).sum::<f64>())
            .collect();
        Ok(Tensor1d::from_vec(self.out_units, 1, out))
    }

    fn backward(&self, input: &Tensor1d, grad_out: &Tensor1d, dw: &mut [f64], db: &mut [f64]) -> Tensor1d {
        let mut grad_in = vec![0.0; self.in_units];
        for (o, g) in grad_out.data.iter().enumerate() {
            db[o] += g;
            let row = &self.weights[o * self.in_units..(o + 1) * self.in_units];
            let drow = &mut dw[o * self.in_units..(o + 1) * self.in_units];
            for ((d, x), (gi, w)) in drow.iter_mut().zip(&input.data).zip(grad_in.iter_mut().zip(row)) {
                *d += g * x;
                *gi += g * w;
            }
        }
        Tensor1d::from_vec(input.maps, input.length, grad_in)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layer {
    Conv(ConvLayer),
    Subsample(SubsampleLayer),
    Flatten,
    BatchNorm(BatchNormLayer),
    Activation(Activation),
    Dense(DenseLayer),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Conv(_) => "conv",
            Layer::Subsample(_) => "subsample",
            Layer::Flatten => "flatten",
            Layer::BatchNorm(_) => "batchnorm",
            Layer::Activation(a) => a.name(),
            Layer::Dense(_) => "dense",
        }
    }

    pub fn output_shape(&self, input: Shape) -> Result<Shape, NetError> {
        let (maps, length) = input;
        let mismatch = |expected: String| NetError::ShapeMismatch {
            layer: self.kind(),
            expected,
            got: input,
        };
        match self {
            Layer::Conv(c) => {
                if maps != c.in_maps || length < c.kernel_len {
                    return Err(mismatch(format!("({}, >={})", c.in_maps, c.kernel_len)));
                }
                Ok((c.out_maps, length - c.kernel_len + 1))
            }
            Layer::Subsample(s) => {
                if s.factor == 0 || length % s.factor != 0 {
                    return Err(NetError::OddLength { length, factor: s.factor });
                }
                Ok((maps, length / s.factor))
            }
            Layer::Flatten => Ok((maps * length, 1)),
            Layer::BatchNorm(b) => {
                if maps * length != b.units {
                    return Err(mismatch(format!("{} units", b.units)));
                }
                Ok(input)
            }
            Layer::Activation(_) => Ok(input),
            Layer::Dense(d) => {
                if maps * length != d.in_units {
                    return Err(mismatch(format!("{} units", d.in_units)));
                }
                Ok((d.out_units, 1))
            }
        }
    }

    /// Trainable parameter arrays in a fixed order.
    pub fn params(&self) -> Vec<&[f64]> {
        match self {
            Layer::Conv(c) => vec![&c.kernels, &c.biases],
            Layer::BatchNorm(b) => vec![&b.gamma, &b.beta],
            Layer::Dense(d) => vec![&d.weights, &d.biases],
            _ => vec![],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Layer::Conv(c) => vec![&mut c.kernels, &mut c.biases],
            Layer::BatchNorm(b) => vec![&mut b.gamma, &mut b.beta],
            Layer::Dense(d) => vec![&mut d.weights, &mut d.biases],
            _ => vec![],
        }
    }

    /// Weight arrays subject to L2 decay (biases and BN parameters excluded).
    pub(crate) fn decayed(&self) -> Option<&[f64]> {
        match self {
            Layer::Conv(c) => Some(&c.kernels),
            Layer::Dense(d) => Some(&d.weights),
            _ => None,
        }
    }

    pub(crate) fn forward_one(&self, x: &Tensor1d) -> Result<Tensor1d, NetError> {
        match self {
            Layer::Conv(c) => c.forward(x),
            Layer::Subsample(s) => s.forward(x),
            Layer::Flatten => Ok(Tensor1d::from_vec(x.data.len(), 1, x.data.clone())),
            Layer::BatchNorm(b) => b.forward_infer(x),
            Layer::Activation(a) => Ok(x.map_values(|v| a.apply(v))),
            Layer::Dense(d) => d.forward(x),
        }
    }

    pub(crate) fn forward_batch(
        &self,
        batch: &[Tensor1d],
        mode: Mode,
    ) -> Result<(Vec<Tensor1d>, Option<BnCache>), NetError> {
        if let (Layer::BatchNorm(b), Mode::Train) = (self, mode) {
            let (out, cache) = b.forward_train(batch)?;
            return Ok((out, Some(cache)));
        }
        let out = batch
            .iter()
            .map(|x| self.forward_one(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((out, None))
    }

    /// Gradient with respect to the layer inputs; parameter gradients are
    /// accumulated into `grads` (same order as [`Layer::params`]).
    pub(crate) fn backward_batch(
        &self,
        inputs: &[Tensor1d],
        outputs: &[Tensor1d],
        cache: Option<&BnCache>,
        grad_out: &[Tensor1d],
        grads: &mut [Vec<f64>],
    ) -> Vec<Tensor1d> {
        match self {
            Layer::Conv(c) => {
                let (dk, db) = split2(grads);
                inputs
                    .iter()
                    .zip(grad_out)
                    .map(|(x, g)| c.backward(x, g, dk, db))
                    .collect()
            }
            Layer::Subsample(s) => grad_out.iter().map(|g| s.backward(g)).collect(),
            Layer::Flatten => inputs
                .iter()
                .zip(grad_out)
                .map(|(x, g)| Tensor1d::from_vec(x.maps, x.length, g.data.clone()))
                .collect(),
            Layer::BatchNorm(b) => {
                let (dg, dbeta) = split2(grads);
                b.backward(cache.expect("batchnorm backward requires a train-mode cache"), grad_out, dg, dbeta)
            }
            Layer::Activation(a) => outputs
                .iter()
                .zip(grad_out)
                .map(|(y, g)| {
                    let d = y
                        .data
                        .iter()
                        .zip(&g.data)
                        .map(|(yv, gv)| gv * a.derivative_from_output(*yv))
                        .collect();
                    Tensor1d::from_vec(g.maps, g.length, d)
                })
                .collect(),
            Layer::Dense(d) => {
                let (dw, db) = split2(grads);
                inputs
                    .iter()
                    .zip(grad_out)
                    .map(|(x, g)| d.backward(x, g, dw, db))
                    .collect()
            }
        }
    }
}

fn split2(grads: &mut [Vec<f64>]) -> (&mut [f64], &mut [f64]) {
    let (a, b) = grads.split_at_mut(1);
    (&mut a[0], &mut b[0])
}
