use rand::Rng;

use strokesig_core::evaluation::parse_jsonl_report;
use strokesig_core::rng::seeded;
use strokesig_core::{render_report, run_loo, ClassifierSpec, EarlyStop, Example, Label, LooOptions, ReportFormat, TrainConfig};

fn clouds(n: usize, seed: u64) -> Vec<Example> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|i| {
            let stroke = i % 2 == 1;
            let shift = if stroke { 0.8 } else { -0.8 };
            let x = (0..24).map(|_| rng.random_range(-1.5..1.5) + shift).collect();
            Example::new(x, if stroke { Label::Stroke } else { Label::Normal })
        })
        .collect()
}

#[test]
fn job_count_does_not_change_results() {
    let data = clouds(16, 1);
    let spec = ClassifierSpec::cnn(3);
    let one = run_loo(&data, &spec, 2, &[1, 2], &LooOptions::default()).unwrap();
    let three = run_loo(&data, &spec, 2, &[1, 2], &LooOptions { jobs: 3, ..LooOptions::default() }).unwrap();
    let csv = |r| render_report(r, ReportFormat::Csv).unwrap();
    assert_eq!(csv(&one), csv(&three));
    assert_eq!(one.repetitions[0].rounds, three.repetitions[0].rounds);
}

#[test]
fn deterministic_baselines_repeat_exactly() {
    let data = clouds(20, 2);
    for spec in [ClassifierSpec::Gnb, ClassifierSpec::knn(), ClassifierSpec::logreg()] {
        let r = run_loo(&data, &spec, 5, &[1, 2, 3, 4, 5], &LooOptions::default()).unwrap();
        let first = r.repetitions[0].metrics;
        assert!(r.repetitions.iter().all(|x| x.metrics == first), "{}", spec.name());
        assert_eq!(r.mean.accuracy, first.accuracy);
    }
}

#[test]
fn positive_class_flip_swaps_sensitivity_and_specificity() {
    let data = clouds(20, 3);
    let normal = run_loo(&data, &ClassifierSpec::Gnb, 1, &[1], &LooOptions::default()).unwrap();
    let stroke = run_loo(
        &data,
        &ClassifierSpec::Gnb,
        1,
        &[1],
        &LooOptions { positive_class: Label::Stroke, ..LooOptions::default() },
    )
    .unwrap();
    assert_eq!(normal.mean.sensitivity, stroke.mean.specificity);
    assert_eq!(normal.mean.specificity, stroke.mean.sensitivity);
    assert_eq!(normal.mean.accuracy, stroke.mean.accuracy);
}

#[test]
fn stop_epochs_only_in_leaky_mode() {
    let data = clouds(10, 4);
    let plain = run_loo(&data, &ClassifierSpec::mlp(5), 1, &[1], &LooOptions::default()).unwrap();
    assert!(plain.stop_epoch_histogram.is_empty());
    let leaky = ClassifierSpec::Mlp {
        train: TrainConfig { epochs: 5, early_stop: EarlyStop::PaperFaithful, ..TrainConfig::default() },
    };
    let r = run_loo(&data, &leaky, 1, &[1], &LooOptions::default()).unwrap();
    assert_eq!(r.stop_epoch_histogram.values().sum::<usize>(), 10);
    assert!(r.stop_epoch_histogram.keys().all(|&e| (1..=5).contains(&e)));
}

#[test]
fn jsonl_report_round_trips() {
    let data = clouds(12, 5);
    let r = run_loo(&data, &ClassifierSpec::logreg(), 2, &[3, 4], &LooOptions::default()).unwrap();
    let text = render_report(&r, ReportFormat::JsonLines).unwrap();
    assert_eq!(parse_jsonl_report(&text).unwrap(), r);
    let csv = render_report(&r, ReportFormat::Csv).unwrap();
    assert_eq!(csv.lines().count(), 4);
}
