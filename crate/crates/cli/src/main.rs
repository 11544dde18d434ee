use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use strokesig_core::evaluation::parse_jsonl_report;
use strokesig_core::features::{format_sig, read_feature_csv, recording_bsi, write_feature_csv, FEATURE_NAMES};
use strokesig_core::neuralnet::{save_model, train};
use strokesig_core::{
    build_paper_cnn, build_paper_mlp, examples_from_features, extract_cohort_features, load_cohort, render_report, run_loo,
    save_cohort, synth_cohort, ClassifierSpec, EarlyStop, Example, FeatureConfig, FeatureVector, Label, LooOptions,
    ReportFormat, Standardizer, SynthOptions, TrainConfig,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "strokesig", version, about = "Stroke vs normal EEG classification pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic cohort file.
    Synth(SynthArgs),
    /// Extract the 24-feature matrix of a cohort to CSV.
    Features(FeaturesArgs),
    /// Train a network on all rows (minus an optional holdout) and save it.
    Train(TrainArgs),
    /// Repeated leave-one-out evaluation.
    Loo(LooArgs),
    /// Single leave-one-out pass of a shallow baseline.
    Baseline(BaselineArgs),
    /// Re-render a JSON-lines report.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 30)]
    normals: usize,
    #[arg(long, default_value_t = 32)]
    strokes: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Record length in seconds.
    #[arg(long, default_value_t = 900.0)]
    duration: f64,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 64.0)]
    rate: f64,
    #[arg(long, default_value_t = 0.2)]
    severity_min: f64,
    #[arg(long, default_value_t = 1.0)]
    severity_max: f64,
    #[arg(long, default_value_t = 0.1)]
    early_stage_fraction: f64,
    #[arg(long, default_value_t = 0.35)]
    variability: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Input {
    /// Cohort file; features are extracted on the fly.
    #[arg(long)]
    cohort: Option<PathBuf>,
    /// Feature CSV written by `features`.
    #[arg(long)]
    features: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FeaturesArgs {
    #[arg(long)]
    cohort: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV of per-subject C3/C4 brain symmetry index.
    #[arg(long)]
    bsi_out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum NetKind {
    Cnn,
    Mlp,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ClassifierKind {
    Cnn,
    Mlp,
    Gnb,
    Knn,
    Logreg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BaselineKind {
    Gnb,
    Knn,
    Logreg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum StopMode {
    None,
    Paper,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Positive {
    Normal,
    Stroke,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
    Jsonl,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => ReportFormat::Text,
            Format::Csv => ReportFormat::Csv,
            Format::Jsonl => ReportFormat::JsonLines,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct NetFlags {
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long, default_value_t = 8)]
    batch_size: usize,
}

impl NetFlags {
    fn config(&self, early_stop: EarlyStop) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.lr,
            early_stop,
            ..TrainConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value_t = NetKind::Cnn)]
    net: NetKind,
    #[command(flatten)]
    net_flags: NetFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `paper` stops at the first epoch that classifies the `--holdout` row.
    #[arg(long, value_enum, default_value_t = StopMode::None)]
    early_stop: StopMode,
    /// Row index kept out of training (0-based).
    #[arg(long)]
    holdout: Option<usize>,
    #[arg(long)]
    model_out: PathBuf,
    /// Feature means and scales used to z-score the inputs.
    #[arg(long)]
    scaler_out: Option<PathBuf>,
    /// Per-epoch mean loss as CSV.
    #[arg(long)]
    history_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalFlags {
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    /// Comma-separated seeds, one per repetition.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1u64, 2, 3, 4, 5])]
    seeds: Vec<u64>,
    #[arg(long, value_enum, default_value_t = Positive::Normal)]
    positive_class: Positive,
    /// Worker threads for the rounds of a repetition.
    #[arg(long, env = "STROKESIG_JOBS", default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LooArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum)]
    classifier: ClassifierKind,
    #[command(flatten)]
    net_flags: NetFlags,
    /// `paper` hands the held-out example to the trainer (leaks test data).
    #[arg(long, value_enum, default_value_t = StopMode::None)]
    early_stop: StopMode,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    l2_cost: f64,
    #[command(flatten)]
    eval: EvalFlags,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum)]
    model: BaselineKind,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    l2_cost: f64,
    #[arg(long, value_enum, default_value_t = Positive::Normal)]
    positive_class: Positive,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// JSON-lines report written by `loo --format jsonl`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    eprintln!("strokesig {VERSION}");
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Features(a) => features(a),
        Command::Train(a) => train_cmd(a),
        Command::Loo(a) => loo(a),
        Command::Baseline(a) => baseline(a),
        Command::Report(a) => report(a),
    }
}

fn echo(line: String) {
    eprintln!("config: {line}");
}

fn input_flag(input: &Input) -> String {
    match (&input.cohort, &input.features) {
        (Some(c), _) => format!("--cohort {}", c.display()),
        (_, Some(f)) => format!("--features {}", f.display()),
        _ => String::new(),
    }
}

fn check_input(path: &Path) -> Result<()> {
    ensure!(path.is_file(), "input file {} does not exist", path.display());
    Ok(())
}

fn check_output(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure!(dir.is_dir(), "output directory {} does not exist", dir.display());
    }
    Ok(())
}

fn validate_input(input: &Input) -> Result<()> {
    match (&input.cohort, &input.features) {
        (Some(p), None) | (None, Some(p)) => check_input(p),
        _ => bail!("exactly one of --cohort or --features is required"),
    }
}

fn load_rows(input: &Input) -> Result<Vec<FeatureVector>> {
    if let Some(path) = &input.features {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        return read_feature_csv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()));
    }
    let path = input.cohort.as_ref().expect("validated input");
    let cohort = load_cohort(path).with_context(|| format!("loading {}", path.display()))?;
    eprintln!("extracting features of {} recordings", cohort.len());
    Ok(extract_cohort_features(&cohort, &FeatureConfig::default())?)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn synth(a: SynthArgs) -> Result<()> {
    check_output(&a.out)?;
    ensure!(
        0.0 < a.severity_min && a.severity_min <= a.severity_max && a.severity_max <= 1.0,
        "severity range must satisfy 0 < min <= max <= 1"
    );
    ensure!((0.0..=1.0).contains(&a.early_stage_fraction), "--early-stage-fraction must lie in [0, 1]");
    echo(format!(
        "synth --normals {} --strokes {} --seed {} --duration {} --rate {} --severity-min {} --severity-max {} --early-stage-fraction {} --variability {} --out {}",
        a.normals, a.strokes, a.seed, a.duration, a.rate, a.severity_min, a.severity_max, a.early_stage_fraction, a.variability,
        a.out.display()
    ));
    let opts = SynthOptions {
        duration_s: a.duration,
        rate_hz: a.rate,
        severity_range: (a.severity_min, a.severity_max),
        early_stage_fraction: a.early_stage_fraction,
        variability: a.variability,
    };
    let started = Instant::now();
    let cohort = synth_cohort(a.normals, a.strokes, a.seed, &opts)?;
    save_cohort(&cohort, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!("wrote {} recordings in {:.1} s", cohort.len(), started.elapsed().as_secs_f64());
    Ok(())
}

fn features(a: FeaturesArgs) -> Result<()> {
    check_input(&a.cohort)?;
    check_output(&a.out)?;
    if let Some(p) = &a.bsi_out {
        check_output(p)?;
    }
    let bsi_flag = a.bsi_out.as_ref().map(|p| format!(" --bsi-out {}", p.display())).unwrap_or_default();
    echo(format!("features --cohort {} --out {}{bsi_flag}", a.cohort.display(), a.out.display()));

    let cohort = load_cohort(&a.cohort).with_context(|| format!("loading {}", a.cohort.display()))?;
    let cfg = FeatureConfig::default();
    let rows = extract_cohort_features(&cohort, &cfg)?;
    let file = File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_feature_csv(BufWriter::new(file), &rows)?;
    eprintln!("wrote {} rows x {} features", rows.len(), FEATURE_NAMES.len());

    if let Some(path) = &a.bsi_out {
        let mut text = String::from("subject_id,label,bsi\n");
        for rec in &cohort.recordings {
            let rec = rec.at_rate(strokesig_core::WORKING_RATE_HZ)?;
            let cell = match recording_bsi(&rec, &cfg)? {
                Some(b) => format_sig(b.value, 9),
                None => "NA".to_string(),
            };
            text.push_str(&format!("{},{},{cell}\n", rec.subject_id, rec.label));
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    validate_input(&a.input)?;
    check_output(&a.model_out)?;
    for p in a.scaler_out.iter().chain(&a.history_out) {
        check_output(p)?;
    }
    let early_stop = match a.early_stop {
        StopMode::None => EarlyStop::Disabled,
        StopMode::Paper => EarlyStop::PaperFaithful,
    };
    ensure!(
        early_stop == EarlyStop::Disabled || a.holdout.is_some(),
        "--early-stop paper needs a --holdout row to watch"
    );
    let cfg = TrainConfig {
        seed: a.seed,
        ..a.net_flags.config(early_stop)
    };
    cfg.validate()?;
    let mut extra = a.holdout.map(|h| format!(" --holdout {h}")).unwrap_or_default();
    for (flag, p) in [("--scaler-out", &a.scaler_out), ("--history-out", &a.history_out)] {
        if let Some(p) = p {
            extra.push_str(&format!(" {flag} {}", p.display()));
        }
    }
    echo(format!(
        "train {} --net {} --epochs {} --lr {} --batch-size {} --seed {} --early-stop {} --model-out {}{extra}",
        input_flag(&a.input),
        if a.net == NetKind::Cnn { "cnn" } else { "mlp" },
        cfg.epochs,
        cfg.learning_rate,
        cfg.batch_size,
        a.seed,
        if early_stop == EarlyStop::PaperFaithful { "paper" } else { "none" },
        a.model_out.display()
    ));

    let rows = load_rows(&a.input)?;
    let mut data = examples_from_features(&rows);
    let held = match a.holdout {
        Some(i) => {
            ensure!(i < data.len(), "--holdout {i} out of range for {} rows", data.len());
            Some(data.remove(i))
        }
        None => None,
    };
    ensure!(!data.is_empty(), "no training rows");
    let scaler = Standardizer::fit(&data);
    let z: Vec<Example> = data.iter().map(|e| scaler.transform_example(e)).collect();
    let z_held = held.as_ref().map(|e| scaler.transform_example(e));
    let mut net = match a.net {
        NetKind::Cnn => build_paper_cnn(a.seed),
        NetKind::Mlp => build_paper_mlp(a.seed),
    };
    let started = Instant::now();
    let history = train(&mut net, &z, z_held.as_ref(), &cfg)?;
    if let Some(epoch) = history.stop_epoch {
        eprintln!("early stop at epoch {epoch}");
    }
    if let Some(e) = &z_held {
        eprintln!("holdout row: truth {}, predicted {}", e.label, net.predict(&e.x)?);
    }
    let correct = z
        .iter()
        .map(|e| net.predict(&e.x).map(|p| p == e.label))
        .collect::<Result<Vec<bool>, _>>()?
        .into_iter()
        .filter(|&ok| ok)
        .count();
    eprintln!(
        "trained {} epochs in {:.1} s; final loss {:.4}; training accuracy {:.3}",
        history.epoch_losses.len(),
        started.elapsed().as_secs_f64(),
        history.epoch_losses.last().copied().unwrap_or(f64::NAN),
        correct as f64 / z.len() as f64
    );
    save_model(&a.model_out, &net).with_context(|| format!("writing {}", a.model_out.display()))?;
    if let Some(path) = &a.scaler_out {
        let mut text = String::from("feature,mean,scale\n");
        for ((name, m), s) in FEATURE_NAMES.iter().zip(&scaler.mean).zip(&scaler.scale) {
            text.push_str(&format!("{name},{},{}\n", format_sig(*m, 17), format_sig(*s, 17)));
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &a.history_out {
        let mut text = String::from("epoch,loss\n");
        for (i, l) in history.epoch_losses.iter().enumerate() {
            text.push_str(&format!("{},{}\n", i + 1, format_sig(*l, 9)));
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn positive_label(p: Positive) -> Label {
    match p {
        Positive::Normal => Label::Normal,
        Positive::Stroke => Label::Stroke,
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Text => "text",
        Format::Csv => "csv",
        Format::Jsonl => "jsonl",
    }
}

fn evaluate(
    input: &Input,
    spec: &ClassifierSpec,
    repetitions: usize,
    seeds: &[u64],
    opts: &LooOptions,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let rows = load_rows(input)?;
    let data = examples_from_features(&rows);
    eprintln!("running {} x leave-one-out on {} examples ({})", repetitions, data.len(), spec.name());
    let started = Instant::now();
    let report = run_loo(&data, spec, repetitions, seeds, opts)?;
    eprintln!("done in {:.1} s", started.elapsed().as_secs_f64());
    write_output(out, &render_report(&report, format.into())?)
}

fn loo(a: LooArgs) -> Result<()> {
    validate_input(&a.input)?;
    if let Some(p) = &a.eval.out {
        check_output(p)?;
    }
    ensure!(
        a.eval.repetitions == a.eval.seeds.len(),
        "--repetitions {} needs exactly that many --seeds, got {}",
        a.eval.repetitions,
        a.eval.seeds.len()
    );
    ensure!(a.eval.jobs >= 1, "--jobs must be at least 1");
    let early_stop = match a.early_stop {
        StopMode::None => EarlyStop::Disabled,
        StopMode::Paper => EarlyStop::PaperFaithful,
    };
    let is_net = matches!(a.classifier, ClassifierKind::Cnn | ClassifierKind::Mlp);
    ensure!(is_net || a.early_stop == StopMode::None, "--early-stop applies to cnn and mlp only");
    let spec = match a.classifier {
        ClassifierKind::Cnn => ClassifierSpec::Cnn { train: a.net_flags.config(early_stop) },
        ClassifierKind::Mlp => ClassifierSpec::Mlp { train: a.net_flags.config(early_stop) },
        ClassifierKind::Gnb => ClassifierSpec::Gnb,
        ClassifierKind::Knn => ClassifierSpec::Knn { k: a.k },
        ClassifierKind::Logreg => ClassifierSpec::LogReg { l2_cost: a.l2_cost },
    };
    if let ClassifierSpec::Cnn { train } | ClassifierSpec::Mlp { train } = &spec {
        train.validate()?;
    }
    if early_stop == EarlyStop::PaperFaithful {
        eprintln!("warning: --early-stop paper reads each held-out example during training; results are optimistic");
    }
    let model_flags = match &spec {
        ClassifierSpec::Cnn { train } | ClassifierSpec::Mlp { train } => format!(
            " --epochs {} --lr {} --batch-size {} --early-stop {}",
            train.epochs,
            train.learning_rate,
            train.batch_size,
            if early_stop == EarlyStop::PaperFaithful { "paper" } else { "none" }
        ),
        ClassifierSpec::Knn { k } => format!(" --k {k}"),
        ClassifierSpec::LogReg { l2_cost } => format!(" --l2-cost {l2_cost}"),
        _ => String::new(),
    };
    let seeds: Vec<String> = a.eval.seeds.iter().map(u64::to_string).collect();
    let out_flag = a.eval.out.as_ref().map(|p| format!(" --out {}", p.display())).unwrap_or_default();
    echo(format!(
        "loo {} --classifier {}{model_flags} --repetitions {} --seeds {} --positive-class {} --jobs {} --format {}{out_flag}",
        input_flag(&a.input),
        spec.name(),
        a.eval.repetitions,
        seeds.join(","),
        positive_label(a.eval.positive_class),
        a.eval.jobs,
        format_name(a.eval.format),
    ));
    let opts = LooOptions {
        positive_class: positive_label(a.eval.positive_class),
        jobs: a.eval.jobs,
    };
    evaluate(&a.input, &spec, a.eval.repetitions, &a.eval.seeds, &opts, a.eval.format, a.eval.out.as_deref())
}

fn baseline(a: BaselineArgs) -> Result<()> {
    validate_input(&a.input)?;
    if let Some(p) = &a.out {
        check_output(p)?;
    }
    let (spec, flags) = match a.model {
        BaselineKind::Gnb => (ClassifierSpec::Gnb, String::new()),
        BaselineKind::Knn => (ClassifierSpec::Knn { k: a.k }, format!(" --k {}", a.k)),
        BaselineKind::Logreg => (ClassifierSpec::LogReg { l2_cost: a.l2_cost }, format!(" --l2-cost {}", a.l2_cost)),
    };
    let out_flag = a.out.as_ref().map(|p| format!(" --out {}", p.display())).unwrap_or_default();
    echo(format!(
        "baseline {} --model {}{flags} --positive-class {} --format {}{out_flag}",
        input_flag(&a.input),
        spec.name(),
        positive_label(a.positive_class),
        format_name(a.format)
    ));
    let opts = LooOptions {
        positive_class: positive_label(a.positive_class),
        jobs: 1,
    };
    evaluate(&a.input, &spec, 1, &[0], &opts, a.format, a.out.as_deref())
}

fn report(a: ReportArgs) -> Result<()> {
    check_input(&a.input)?;
    if let Some(p) = &a.out {
        check_output(p)?;
    }
    let out_flag = a.out.as_ref().map(|p| format!(" --out {}", p.display())).unwrap_or_default();
    echo(format!("report --input {} --format {}{out_flag}", a.input.display(), format_name(a.format)));
    let text = fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let report = parse_jsonl_report(&text)?;
    write_output(a.out.as_deref(), &render_report(&report, a.format.into())?)
}
