//! Acceptance criteria 1-9. Runs as a plain binary so every criterion prints
//! one PASS/FAIL line; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;

use strokesig_core::evaluation::{compute_metrics, render_report, ClassifierSpec, ConfusionMatrix, EvalReport, LooOptions, ReportFormat};
use strokesig_core::features::{
    brain_symmetry_index, extract_cohort_features, fractal_exponent, kurtosis, recording_bsi, relative_band_powers, welch_psd,
    BandDef, FeatureConfig, Psd,
};
use strokesig_core::neuralnet::{BatchNormLayer, Network, Tensor1d};
use strokesig_core::rng::seeded;
use strokesig_core::signal_io::Label;
use strokesig_core::{build_paper_cnn, examples_from_features, make_loo_plan, run_loo, synth_cohort, Cohort, Example, SynthOptions};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn criterion_1() -> Outcome {
    let nb = compute_metrics(&ConfusionMatrix { tp: 25, fn_: 5, fp: 14, tn: 18 }).map_err(|e| e.to_string())?;
    let nn = compute_metrics(&ConfusionMatrix { tp: 23, fn_: 7, fp: 13, tn: 19 }).map_err(|e| e.to_string())?;
    let cnn = compute_metrics(&ConfusionMatrix { tp: 30, fn_: 0, fp: 5, tn: 27 }).map_err(|e| e.to_string())?;
    let expect = [
        ("nb", nb, [0.694, 0.833, 0.563, 0.725, 0.641, 0.833]),
        ("nn", nn, [0.677, 0.767, 0.594, 0.697, 0.639, 0.767]),
    ];
    let mut worst: f64 = 0.0;
    for (name, got, want) in expect {
        let vals = [got.accuracy, got.sensitivity, got.specificity, got.f1, got.precision, got.recall];
        for (v, w) in vals.iter().zip(want) {
            let v = v.ok_or(format!("{name}: undefined metric"))?;
            worst = worst.max((v - w).abs());
        }
    }
    let cnn_acc = cnn.accuracy.unwrap_or(f64::NAN);
    worst = worst.max((cnn_acc - 0.919).abs());
    check(worst <= 0.001, format!("max deviation {worst:.5} over NB/NN/1DCNN cells (1DCNN acc {cnn_acc:.4})"))
}

fn criterion_2() -> Outcome {
    let net = build_paper_cnn(0);
    let trace = net.shape_trace().map_err(|e| e.to_string())?;
    let mut dedup: Vec<(usize, usize)> = Vec::new();
    for s in trace {
        if dedup.last() != Some(&s) {
            dedup.push(s);
        }
    }
    let want = vec![(20, 20), (20, 10), (12, 8), (12, 4), (48, 1), (2, 1)];
    let out = net.forward(&[0.1; 24]).map_err(|e| e.to_string())?;
    check(
        dedup == want && out.len() == 2,
        format!("shape trace {dedup:?}, output width {}", out.len()),
    )
}

fn micro_batch(n: usize, seed: u64) -> Vec<Example> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|i| {
            let x = (0..24).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            Example::new(x, if i % 2 == 0 { Label::Normal } else { Label::Stroke })
        })
        .collect()
}

/// Largest relative error between analytic and central-difference gradients.
fn max_grad_error(net: &Network, batch: &[&Example]) -> Result<f64, String> {
    let (_, grads) = net.gradients(batch).map_err(|e| e.to_string())?;
    let h = 1e-5;
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (g, group) in grads.iter().enumerate() {
        for (i, &analytic) in group.iter().enumerate() {
            let orig = probe.param_groups()[g][i];
            probe.param_groups_mut()[g][i] = orig + h;
            let up = probe.batch_loss(batch).map_err(|e| e.to_string())?;
            probe.param_groups_mut()[g][i] = orig - h;
            let down = probe.batch_loss(batch).map_err(|e| e.to_string())?;
            probe.param_groups_mut()[g][i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let denom = analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic - numeric).abs() / denom);
        }
    }
    Ok(worst)
}

fn criterion_3() -> Outcome {
    let data = micro_batch(6, 0);
    let batch: Vec<&Example> = data.iter().collect();
    let mut net = build_paper_cnn(0);
    let at_init = max_grad_error(&net, &batch)?;
    for _ in 0..10 {
        net.backward_and_update(&batch, 0.05).map_err(|e| e.to_string())?;
    }
    let trained = max_grad_error(&net, &batch)?;
    let worst = at_init.max(trained);
    check(
        worst <= 1e-4,
        format!("{} parameters, max rel. error {at_init:.2e} at init, {trained:.2e} after 10 steps", net.parameter_count()),
    )
}

fn criterion_4() -> Outcome {
    let eps = 1e-5;
    let bn = BatchNormLayer::new(48, eps, 0.9);
    let mut rng = seeded(4);
    let batch: Vec<Tensor1d> = (0..8)
        .map(|_| Tensor1d::from_vec(48, 1, (0..48).map(|u| 3.0 * rng.random::<f64>() + u as f64 * 0.1 - 2.0).collect()))
        .collect();
    let (out, cache) = bn.forward_train(&batch).map_err(|e| e.to_string())?;
    let mut worst_mean: f64 = 0.0;
    let mut worst_var: f64 = 0.0;
    for u in 0..48 {
        let col: Vec<f64> = out.iter().map(|t| t.data[u]).collect();
        let mean = col.iter().sum::<f64>() / 8.0;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 8.0;
        let s2 = cache.var[u];
        worst_mean = worst_mean.max(mean.abs());
        worst_var = worst_var.max((var - s2 / (s2 + eps)).abs());
    }
    let small = BatchNormLayer::new(1, 0.0, 0.9);
    let xs: Vec<Tensor1d> = [1.0, 2.0, 3.0].iter().map(|&v| Tensor1d::from_vec(1, 1, vec![v])).collect();
    let (ys, _) = small.forward_train(&xs).map_err(|e| e.to_string())?;
    let ys: Vec<f64> = ys.iter().map(|t| t.data[0]).collect();
    let ok_example = close(ys[0], -1.224745, 1e-6) && close(ys[1], 0.0, 1e-12) && close(ys[2], 1.224745, 1e-6);
    check(
        worst_mean <= 1e-7 && worst_var <= 1e-4 && ok_example,
        format!("max |mean| {worst_mean:.1e}, max var error {worst_var:.1e}, {{1,2,3}} -> [{:.6}, {:.6}, {:.6}]", ys[0], ys[1], ys[2]),
    )
}

/// Welch PSD recomputed with an O(n^2) DFT per segment.
fn dft_welch(x: &[f64], fs: f64, seg: usize, overlap: f64) -> Vec<f64> {
    let step = seg - (seg as f64 * overlap).floor() as usize;
    let n_seg = (x.len() - seg) / step + 1;
    let w: Vec<f64> = (0..seg).map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / seg as f64).cos()).collect();
    let u: f64 = w.iter().map(|v| v * v).sum();
    let mut out = vec![0.0; seg / 2 + 1];
    for s in 0..n_seg {
        let part = &x[s * step..s * step + seg];
        for (k, o) in out.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, (v, wv)) in part.iter().zip(&w).enumerate() {
                let ang = -2.0 * PI * (k * t) as f64 / seg as f64;
                re += v * wv * ang.cos();
                im += v * wv * ang.sin();
            }
            let one_sided = if k == 0 || k == seg / 2 { 1.0 } else { 2.0 };
            *o += one_sided * (re * re + im * im) / (fs * u * n_seg as f64);
        }
    }
    out
}

fn white(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn criterion_5() -> Outcome {
    let fs = 64.0;
    let mut notes = Vec::new();
    let mut ok = true;

    let noise = white(2048, 11);
    let fast = welch_psd(&noise, fs, 256, 0.5).map_err(|e| e.to_string())?;
    let slow = dft_welch(&noise, fs, 256, 0.5);
    let dft_err = fast
        .power
        .iter()
        .zip(&slow)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1e-12))
        .fold(0.0, f64::max);
    ok &= dft_err < 1e-9;
    notes.push(format!("welch vs DFT {dft_err:.1e}"));

    let sine: Vec<f64> = (0..64 * 60).map(|i| (2.0 * PI * 10.0 * i as f64 / fs).sin()).collect();
    let psd = welch_psd(&sine, fs, 256, 0.5).map_err(|e| e.to_string())?;
    let alpha = relative_band_powers(&psd, &BandDef::STANDARD).map_err(|e| e.to_string())?[2];
    ok &= alpha >= 0.99;
    notes.push(format!("alpha(10 Hz) {alpha:.4}"));

    let gauss = white(200_000, 12);
    let kg = kurtosis(&gauss).map_err(|e| e.to_string())?;
    ok &= close(kg, 3.0, 0.1);
    notes.push(format!("gauss kurtosis {kg:.3}"));

    let ks = kurtosis(&sine).map_err(|e| e.to_string())?;
    ok &= close(ks, 1.5, 0.01);
    notes.push(format!("sine kurtosis {ks:.4}"));

    let long = white(64 * 900, 13);
    let psd = welch_psd(&long, fs, 256, 0.5).map_err(|e| e.to_string())?;
    let beta = fractal_exponent(&psd, 0.5, 20.0).map_err(|e| e.to_string())?;
    ok &= close(beta, 0.0, 0.15);
    notes.push(format!("white fractal {beta:.3}"));

    let ms = long.iter().map(|v| v * v).sum::<f64>() / long.len() as f64;
    let parseval = (psd.total_power() - ms).abs() / ms;
    ok &= parseval < 0.05;
    notes.push(format!("parseval {:.2}%", 100.0 * parseval));

    check(ok, notes.join(", "))
}

fn criterion_6(cohort: &Cohort) -> Outcome {
    let mut rng = seeded(6);
    let power: Vec<f64> = (0..129).map(|_| 0.1 + rng.random::<f64>()).collect();
    let l = Psd::from_bins(power.clone(), 0.25).map_err(|e| e.to_string())?;
    let r3 = Psd::from_bins(power.iter().map(|p| 3.0 * p).collect(), 0.25).map_err(|e| e.to_string())?;
    let same = brain_symmetry_index(&[l.clone()], &[l.clone()]).map_err(|e| e.to_string())?.value;
    let ratio3 = brain_symmetry_index(&[l], &[r3]).map_err(|e| e.to_string())?.value;

    let cfg = FeatureConfig::default();
    let severities = strokesig_core::synthgen::cohort_specs(30, 32, 7, &SynthOptions::default());
    let (mut normals, mut severe) = (Vec::new(), Vec::new());
    for (rec, spec) in cohort.recordings.iter().zip(&severities) {
        let bsi = recording_bsi(rec, &cfg).map_err(|e| e.to_string())?.ok_or("missing C4")?.value;
        match rec.label {
            Label::Normal => normals.push(bsi),
            Label::Stroke if spec.cbf_severity >= 0.5 => severe.push(bsi),
            Label::Stroke => {}
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mn, ms) = (mean(&normals), mean(&severe));
    check(
        same == 0.0 && close(ratio3, 0.5, 1e-12) && mn < 0.047 && ms > 0.06,
        format!(
            "BSI(x,x)={same}, ratio-3 {ratio3:.6}, normal mean {mn:.4} (n={}), severity>=0.5 mean {ms:.4} (n={})",
            normals.len(),
            severe.len()
        ),
    )
}

fn criterion_7(data: &[Example]) -> Outcome {
    let plan = make_loo_plan(62).map_err(|e| e.to_string())?;
    plan.validate().map_err(|e| e.to_string())?;
    let mut held = vec![0; 62];
    for (test, train) in &plan.rounds {
        held[*test] += 1;
        if train.len() != 61 || train.contains(test) {
            return Err(format!("round {test} has a bad training set"));
        }
    }
    let report = run_loo(data, &ClassifierSpec::Gnb, 5, &[1, 2, 3, 4, 5], &LooOptions::default()).map_err(|e| e.to_string())?;
    let rounds_ok = report.repetitions.iter().all(|r| {
        let mut seen: Vec<usize> = r.rounds.iter().map(|x| x.test_index).collect();
        seen.sort_unstable();
        seen == (0..62).collect::<Vec<_>>()
    });
    let mean_acc = report.repetitions.iter().map(|r| r.metrics.accuracy.unwrap()).sum::<f64>() / 5.0;
    check(
        plan.rounds.len() == 62 && held.iter().all(|&c| c == 1) && rounds_ok && report.repetitions.len() == 5
            && close(report.mean.accuracy.unwrap(), mean_acc, 1e-12),
        format!("62 rounds x 61 train, each held out once, 5 repetitions averaged (GNB mean acc {mean_acc:.3})"),
    )
}

fn loo_csv(data: &[Example], spec: &ClassifierSpec) -> Result<(EvalReport, String), String> {
    let report = run_loo(data, spec, 5, &[1, 2, 3, 4, 5], &LooOptions::default()).map_err(|e| e.to_string())?;
    let csv = render_report(&report, ReportFormat::Csv).map_err(|e| e.to_string())?;
    Ok((report, csv))
}

fn criterion_8(data: &[Example], cnn: &EvalReport) -> Outcome {
    let (gnb, _) = loo_csv(data, &ClassifierSpec::Gnb)?;
    let accs: Vec<f64> = cnn.repetitions.iter().map(|r| r.metrics.accuracy.unwrap()).collect();
    let base: Vec<f64> = gnb.repetitions.iter().map(|r| r.metrics.accuracy.unwrap()).collect();
    let mean = cnn.mean.accuracy.unwrap();
    let beats = accs.iter().zip(&base).all(|(c, g)| c > g);
    let fmt = |v: &[f64]| v.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>().join(" ");
    check(
        mean >= 0.85 && beats,
        format!("1DCNN mean acc {mean:.3} [{}] vs GNB [{}]", fmt(&accs), fmt(&base)),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut results: Vec<(u32, Outcome)> = vec![
        (1, criterion_1()),
        (2, criterion_2()),
        (3, criterion_3()),
        (4, criterion_4()),
        (5, criterion_5()),
    ];

    let data = synth_cohort(30, 32, 7, &SynthOptions::default())
        .map_err(|e| e.to_string())
        .and_then(|cohort| {
            let feats = extract_cohort_features(&cohort, &FeatureConfig::default()).map_err(|e| e.to_string())?;
            Ok((cohort, examples_from_features(&feats)))
        });
    match &data {
        Ok((cohort, examples)) => {
            results.push((6, criterion_6(cohort)));
            results.push((7, criterion_7(examples)));
            let spec = ClassifierSpec::cnn(200);
            match (loo_csv(examples, &spec), loo_csv(examples, &spec)) {
                (Ok((first, csv_a)), Ok((_, csv_b))) => {
                    results.push((8, criterion_8(examples, &first)));
                    results.push((
                        9,
                        check(csv_a == csv_b, format!("two runs, {} CSV bytes, identical: {}", csv_a.len(), csv_a == csv_b)),
                    ));
                }
                (Err(e), _) | (_, Err(e)) => {
                    results.push((8, Err(e.clone())));
                    results.push((9, Err(e)));
                }
            }
        }
        Err(e) => {
            for c in 6..=9 {
                results.push((c, Err(format!("cohort synthesis failed: {e}"))));
            }
        }
    }

    let mut failed = 0;
    for (n, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {n}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
