use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EvalError, EvalReport, MetricSet, PositiveClass, RepetitionResult, METRIC_NAMES};
use crate::features::format_sig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Fixed-width grid with one row per repetition and a mean row.
    Text,
    /// One row per repetition plus a `mean` row; no timing column, so equal
    /// inputs give byte-identical files.
    Csv,
    /// Header, repetition and mean records, one JSON object per line.
    JsonLines,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Header {
        classifier: String,
        positive_class: PositiveClass,
        n_examples: usize,
    },
    Repetition(RepetitionResult),
    Mean {
        metrics: MetricSet,
        undefined_counts: [usize; 6],
        /// `(epoch, rounds)` pairs.
        stop_epoch_histogram: Vec<(usize, usize)>,
    },
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format_sig(x, 9))
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> Result<String, EvalError> {
    if report.repetitions.is_empty() {
        return Err(EvalError::EmptyReport);
    }
    Ok(match format {
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Text => render_text(report),
        ReportFormat::JsonLines => render_jsonl(report),
    })
}

fn render_csv(report: &EvalReport) -> String {
    let mut out = String::from("repetition,seed");
    for name in METRIC_NAMES {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",tp,fn,fp,tn,undefined\n");
    for rep in &report.repetitions {
        let c = &rep.confusion;
        let _ = write!(out, "{},{}", rep.repetition, rep.seed);
        for v in rep.metrics.values() {
            let _ = write!(out, ",{}", cell(v));
        }
        let _ = writeln!(out, ",{},{},{},{},{}", c.tp, c.fn_, c.fp, c.tn, rep.metrics.undefined_count());
    }
    out.push_str("mean,");
    for v in report.mean.values() {
        let _ = write!(out, ",{}", cell(v));
    }
    let _ = writeln!(out, ",,,,,{}", report.undefined_counts.iter().sum::<usize>());
    out
}

fn render_text(report: &EvalReport) -> String {
    let fmt3 = |v: Option<f64>| v.map_or_else(|| "n/a*".to_string(), |x| format!("{x:.3}"));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "classifier: {}   positive class: {}   examples: {}   repetitions: {}",
        report.classifier,
        report.positive_class,
        report.n_examples,
        report.repetitions.len()
    );
    out.push('\n');
    let _ = writeln!(
        out,
        "{:<6}{:>20}  {:>6} {:>6} {:>6} {:>7} {:>6} {:>6}  {:>4} {:>4} {:>4} {:>4}  {:>9}",
        "rep", "seed", "Acc.", "Sens.", "Spec.", "F-Score", "Prec.", "Rec.", "TP", "FN", "FP", "TN", "time(s)"
    );
    for rep in &report.repetitions {
        let m = rep.metrics;
        let c = rep.confusion;
        let _ = writeln!(
            out,
            "{:<6}{:>20}  {:>6} {:>6} {:>6} {:>7} {:>6} {:>6}  {:>4} {:>4} {:>4} {:>4}  {:>9.2}",
            rep.repetition,
            rep.seed,
            fmt3(m.accuracy),
            fmt3(m.sensitivity),
            fmt3(m.specificity),
            fmt3(m.f1),
            fmt3(m.precision),
            fmt3(m.recall),
            c.tp,
            c.fn_,
            c.fp,
            c.tn,
            rep.wall_clock_s
        );
    }
    let m = report.mean;
    let _ = writeln!(
        out,
        "{:<6}{:>20}  {:>6} {:>6} {:>6} {:>7} {:>6} {:>6}",
        "mean",
        "",
        fmt3(m.accuracy),
        fmt3(m.sensitivity),
        fmt3(m.specificity),
        fmt3(m.f1),
        fmt3(m.precision),
        fmt3(m.recall)
    );
    let excluded: usize = report.undefined_counts.iter().sum();
    if excluded > 0 {
        let _ = writeln!(out, "\n* undefined (zero denominator); {excluded} value(s) excluded from the means");
    }
    if !report.stop_epoch_histogram.is_empty() {
        let parts: Vec<String> = report
            .stop_epoch_histogram
            .iter()
            .map(|(e, n)| format!("{e}:{n}"))
            .collect();
        let _ = writeln!(out, "\nearly-stop epochs (epoch:rounds): {}", parts.join(" "));
    }
    out
}

fn render_jsonl(report: &EvalReport) -> String {
    let mut lines = vec![Line::Header {
        classifier: report.classifier.clone(),
        positive_class: report.positive_class,
        n_examples: report.n_examples,
    }];
    lines.extend(report.repetitions.iter().cloned().map(Line::Repetition));
    lines.push(Line::Mean {
        metrics: report.mean,
        undefined_counts: report.undefined_counts,
        stop_epoch_histogram: report.stop_epoch_histogram.iter().map(|(e, n)| (*e, *n)).collect(),
    });
    let mut out = String::new();
    for l in &lines {
        out.push_str(&serde_json::to_string(l).expect("report types serialize"));
        out.push('\n');
    }
    out
}

/// Reads the JSON-lines rendering back. The mean record is recomputed from
/// the repetitions rather than trusted.
pub fn parse_jsonl_report(text: &str) -> Result<EvalReport, EvalError> {
    let mut header = None;
    let mut reps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line = serde_json::from_str(raw).map_err(|e| EvalError::ReportParse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        match line {
            Line::Header {
                classifier,
                positive_class,
                n_examples,
            } => header = Some((classifier, positive_class, n_examples)),
            Line::Repetition(r) => reps.push(r),
            Line::Mean { .. } => {}
        }
    }
    let (classifier, positive, n) = header.ok_or(EvalError::ReportParse {
        line: 1,
        reason: "missing header record".into(),
    })?;
    if reps.is_empty() {
        return Err(EvalError::EmptyReport);
    }
    Ok(EvalReport::from_repetitions(classifier, positive, n, reps))
}
