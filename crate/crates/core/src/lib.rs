//! Stroke-vs-normal classification from EEG/EOG recordings.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! ```text
//! synthgen     synthetic cohorts with spectral slowing and hemispheric asymmetry
//! signal_io    recording model, `.ssig` cohort files, anti-aliased downsampling to 64 Hz
//! features     Welch PSD, the 24-value handcrafted feature vector, brain symmetry index
//! neuralnet    1D CNN (20C-20S-12C-12S-BN-FC) and MLP trained by plain SGD
//! baselines    Gaussian naive Bayes, k-nearest neighbours, L2 logistic regression
//! evaluation   repeated leave-one-out, confusion matrices, metric reports
//! ```
//!
//! The most frequently used types are re-exported at the crate root.

pub mod baselines;
pub mod dataset;
pub mod evaluation;
pub mod features;
pub mod neuralnet;
pub mod rng;
pub mod signal_io;
pub mod synthgen;

pub use baselines::{GnbModel, KnnModel, LogRegModel, Standardizer};
pub use dataset::{examples_from_features, Example};
pub use evaluation::{
    compute_metrics, make_loo_plan, render_report, run_loo, ClassifierSpec, ConfusionMatrix,
    EvalReport, LooOptions, LooPlan, MetricSet, PositiveClass, ReportFormat,
};
pub use features::{
    brain_symmetry_index, extract_cohort_features, extract_features, welch_psd, BandDef, BsiResult, FeatureConfig,
    FeatureVector, Psd,
};
pub use neuralnet::{build_paper_cnn, build_paper_mlp, EarlyStop, Network, TrainConfig, Tensor1d};
pub use signal_io::{
    downsample, load_cohort, load_cohort_at, save_cohort, Channel, Cohort, Label, Recording,
    WORKING_RATE_HZ,
};
pub use synthgen::{synth_cohort, synth_recording, SubjectSpec, SynthOptions};
