//! Repeated leave-one-out evaluation, metrics and reports.

mod classifier;
mod metrics;
mod report;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Example;
use crate::rng::derive_seed;
use crate::signal_io::Label;

pub use classifier::{fit_classifier, ClassifierError, ClassifierSpec, FittedClassifier};
pub use metrics::{compute_metrics, mean_metrics, ConfusionMatrix, MetricSet, METRIC_NAMES};
pub use report::{parse_jsonl_report, render_report, ReportFormat};

/// Which label counts as "positive" for sensitivity and precision.
pub type PositiveClass = Label;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("leave-one-out needs at least 2 examples, got {0}")]
    TooFewExamples(usize),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("report has no repetitions")]
    EmptyReport,
    #[error("{repetitions} repetitions requested but {seeds} seeds given")]
    SeedCountMismatch { repetitions: usize, seeds: usize },
    #[error("invalid leave-one-out plan: {0}")]
    InvalidPlan(String),
    #[error("repetition {repetition}, round {round}: {source}")]
    Round {
        repetition: usize,
        round: usize,
        #[source]
        source: ClassifierError,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("report line {line}: {reason}")]
    ReportParse { line: usize, reason: String },
}

/// One round per example: `(test_index, train_indices)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LooPlan {
    pub n: usize,
    pub rounds: Vec<(usize, Vec<usize>)>,
}

pub fn make_loo_plan(n: usize) -> Result<LooPlan, EvalError> {
    if n < 2 {
        return Err(EvalError::TooFewExamples(n));
    }
    let rounds = (0..n)
        .map(|test| (test, (0..n).filter(|&i| i != test).collect()))
        .collect();
    Ok(LooPlan { n, rounds })
}

impl LooPlan {
    /// Checks that every index is held out exactly once and never trained on
    /// in its own round.
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |s: String| Err(EvalError::InvalidPlan(s));
        if self.rounds.len() != self.n {
            return bad(format!("{} rounds for {} examples", self.rounds.len(), self.n));
        }
        let mut seen = vec![false; self.n];
        for (test, train) in &self.rounds {
            if *test >= self.n || seen[*test] {
                return bad(format!("index {test} held out twice or out of range"));
            }
            seen[*test] = true;
            if train.len() != self.n - 1 || train.contains(test) {
                return bad(format!("round for {test} has a bad training set"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub round: usize,
    pub test_index: usize,
    pub truth: Label,
    pub predicted: Label,
    pub p_stroke: Option<f64>,
    pub stop_epoch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    /// 1-based.
    pub repetition: usize,
    pub seed: u64,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricSet,
    pub rounds: Vec<RoundResult>,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: String,
    pub positive_class: PositiveClass,
    pub n_examples: usize,
    pub repetitions: Vec<RepetitionResult>,
    pub mean: MetricSet,
    /// Per metric, how many repetitions were undefined and left out of `mean`.
    pub undefined_counts: [usize; 6],
    /// Early-stop epoch -> number of rounds that stopped there.
    pub stop_epoch_histogram: BTreeMap<usize, usize>,
}

impl EvalReport {
    pub fn from_repetitions(
        classifier: impl Into<String>,
        positive_class: PositiveClass,
        n_examples: usize,
        repetitions: Vec<RepetitionResult>,
    ) -> EvalReport {
        let sets: Vec<MetricSet> = repetitions.iter().map(|r| r.metrics).collect();
        let (mean, undefined_counts) = mean_metrics(&sets);
        let mut stop_epoch_histogram = BTreeMap::new();
        for e in repetitions.iter().flat_map(|r| &r.rounds).filter_map(|r| r.stop_epoch) {
            *stop_epoch_histogram.entry(e).or_insert(0) += 1;
        }
        EvalReport {
            classifier: classifier.into(),
            positive_class,
            n_examples,
            repetitions,
            mean,
            undefined_counts,
            stop_epoch_histogram,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LooOptions {
    pub positive_class: PositiveClass,
    /// Worker threads for the rounds of a repetition; results do not depend on it.
    pub jobs: usize,
}

impl Default for LooOptions {
    fn default() -> Self {
        LooOptions {
            positive_class: Label::Normal,
            jobs: 1,
        }
    }
}

fn run_round(
    data: &[Example],
    spec: &ClassifierSpec,
    rep_seed: u64,
    repetition: usize,
    round: usize,
    (test, train_idx): &(usize, Vec<usize>),
) -> Result<RoundResult, EvalError> {
    let ctx = |source| EvalError::Round { repetition, round, source };
    let train_rows: Vec<Example> = train_idx.iter().map(|&i| data[i].clone()).collect();
    let test_ex = &data[*test];
    let leak = spec.reads_test_example().then_some(test_ex);
    let (model, stop_epoch) = fit_classifier(spec, &train_rows, leak, derive_seed(rep_seed, round as u64)).map_err(ctx)?;
    let (predicted, p_stroke) = model.predict(&test_ex.x).map_err(ctx)?;
    Ok(RoundResult {
        round,
        test_index: *test,
        truth: test_ex.label,
        predicted,
        p_stroke,
        stop_epoch,
    })
}

/// Repeated leave-one-out: `repetitions` full passes, pass `r` seeded by
/// `seeds[r]`, each round trained from scratch.
pub fn run_loo(
    data: &[Example],
    spec: &ClassifierSpec,
    repetitions: usize,
    seeds: &[u64],
    opts: &LooOptions,
) -> Result<EvalReport, EvalError> {
    if repetitions != seeds.len() {
        return Err(EvalError::SeedCountMismatch {
            repetitions,
            seeds: seeds.len(),
        });
    }
    let plan = make_loo_plan(data.len())?;
    plan.validate()?;
    let pool = if opts.jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.jobs)
                .build()
                .map_err(|e| EvalError::ThreadPool(e.to_string()))?,
        )
    } else {
        None
    };

    let mut reps = Vec::with_capacity(repetitions);
    for (r, &seed) in seeds.iter().enumerate() {
        let repetition = r + 1;
        let started = Instant::now();
        let run = |(round, entry): (usize, &(usize, Vec<usize>))| run_round(data, spec, seed, repetition, round, entry);
        let rounds: Vec<RoundResult> = match &pool {
            Some(p) => p.install(|| plan.rounds.par_iter().enumerate().map(run).collect::<Result<_, _>>())?,
            None => plan.rounds.iter().enumerate().map(run).collect::<Result<_, _>>()?,
        };
        let mut tested = vec![0usize; plan.n];
        for rr in &rounds {
            tested[rr.test_index] += 1;
        }
        if tested.iter().any(|&c| c != 1) {
            return Err(EvalError::InvalidPlan("an index was not tested exactly once".into()));
        }
        let confusion = ConfusionMatrix::from_pairs(rounds.iter().map(|r| (r.truth, r.predicted)), opts.positive_class);
        let metrics = compute_metrics(&confusion)?;
        reps.push(RepetitionResult {
            repetition,
            seed,
            confusion,
            metrics,
            rounds,
            wall_clock_s: started.elapsed().as_secs_f64(),
        });
    }
    Ok(EvalReport::from_repetitions(spec.name(), opts.positive_class, data.len(), reps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Vec<Example> {
        vec![
            Example::new(vec![0.0, 1.0], Label::Normal),
            Example::new(vec![0.2, 0.9], Label::Normal),
            Example::new(vec![0.1, 1.1], Label::Normal),
            Example::new(vec![2.0, -1.0], Label::Stroke),
        ]
    }

    #[test]
    fn plan_shapes() {
        let p = make_loo_plan(62).unwrap();
        assert_eq!(p.rounds.len(), 62);
        assert!(p.rounds.iter().all(|(_, t)| t.len() == 61));
        p.validate().unwrap();
        let p2 = make_loo_plan(2).unwrap();
        assert_eq!(p2.rounds, vec![(0, vec![1]), (1, vec![0])]);
        assert!(matches!(make_loo_plan(1), Err(EvalError::TooFewExamples(1))));
    }

    #[test]
    fn constant_predictor_accuracy() {
        let spec = ClassifierSpec::Constant { label: Label::Normal };
        let r = run_loo(&toy(), &spec, 1, &[1], &LooOptions::default()).unwrap();
        assert_eq!(r.mean.accuracy, Some(0.75));
        assert_eq!(r.repetitions[0].rounds.len(), 4);
    }

    #[test]
    fn seed_count_checked() {
        assert!(matches!(
            run_loo(&toy(), &ClassifierSpec::Gnb, 2, &[1], &LooOptions::default()),
            Err(EvalError::SeedCountMismatch { .. })
        ));
    }

    #[test]
    fn round_errors_carry_context() {
        // with one Stroke example, the round holding it out trains on Normals only
        match run_loo(&toy(), &ClassifierSpec::Gnb, 1, &[3], &LooOptions::default()) {
            Err(EvalError::Round { repetition: 1, round: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
