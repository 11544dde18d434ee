//! Small tensor engine for the 1D CNN and the MLP baseline.
//!
//! Everything runs on `f64` with `libm` transcendental functions, so a given
//! seed, data set and [`TrainConfig`] reproduce the same loss history
//! bit-for-bit on any platform.

mod layers;
mod model_file;
mod network;
mod train;

use thiserror::Error;

pub use layers::{
    Activation, BatchNormLayer, BnCache, ConvLayer, DenseLayer, Layer, Mode, SubsampleLayer,
};
pub use model_file::{load_model, read_model, save_model, write_model, MODEL_HEADER};
pub use network::{build_paper_cnn, build_paper_mlp, Network, PAPER_MLP_L2};
pub use train::{train, EarlyStop, TrainConfig, TrainHistory};

/// `(maps, length)`.
pub type Shape = (usize, usize);

#[derive(Debug, Error)]
pub enum NetError {
    #[error("{layer}: expected input {expected}, got {got:?}")]
    ShapeMismatch {
        layer: &'static str,
        expected: String,
        got: Shape,
    },
    #[error("length {length} is not divisible by subsampling factor {factor}")]
    OddLength { length: usize, factor: usize },
    #[error("batch normalization needs at least 2 examples per batch, got {0}")]
    BatchTooSmall(usize),
    #[error("batch normalization running statistics are not initialized")]
    UninitializedStats,
    #[error("loss is not finite (training diverged)")]
    NonFiniteLoss,
    #[error("empty batch")]
    EmptyBatch,
    #[error("empty training set")]
    EmptyTrainSet,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("network must end in 2 output units, got {0:?}")]
    BadOutput(Shape),
    #[error("malformed model file at line {line}: {reason}")]
    MalformedModelFile { line: usize, reason: String },
    #[error("unsupported model file version {0:?}")]
    VersionMismatch(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Stack of `maps` equally long 1D signals, stored map-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor1d {
    pub maps: usize,
    pub length: usize,
    pub data: Vec<f64>,
}

impl Tensor1d {
    pub fn zeros(maps: usize, length: usize) -> Tensor1d {
        Tensor1d {
            maps,
            length,
            data: vec![0.0; maps * length],
        }
    }

    pub fn from_vec(maps: usize, length: usize, data: Vec<f64>) -> Tensor1d {
        assert_eq!(data.len(), maps * length, "tensor data length");
        Tensor1d { maps, length, data }
    }

    pub fn shape(&self) -> Shape {
        (self.maps, self.length)
    }

    pub fn map(&self, m: usize) -> &[f64] {
        &self.data[m * self.length..(m + 1) * self.length]
    }

    pub fn map_mut(&mut self, m: usize) -> &mut [f64] {
        &mut self.data[m * self.length..(m + 1) * self.length]
    }

    pub fn at(&self, m: usize, t: usize) -> f64 {
        self.data[m * self.length + t]
    }

    pub(crate) fn map_values(&self, f: impl Fn(f64) -> f64) -> Tensor1d {
        Tensor1d {
            maps: self.maps,
            length: self.length,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| libm::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
