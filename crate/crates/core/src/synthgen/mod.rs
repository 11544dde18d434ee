//! Synthetic stroke/normal cohorts.
//!
//! Each subject gets a [`SpectralRecipe`]: relative band powers for C3 and
//! OZ, a within-band `1/f^e` tilt and a C4 gain. Stroke severity morphs the
//! spectrum from alpha-dominant towards delta/theta dominance, fully on the
//! central channels and partially on OZ. An individual slowing offset, drawn
//! from the subject seed and shared by C3 and OZ, makes single features noisy
//! while the C3-OZ contrast stays informative.
//!
//! Signals are rendered by shaping random-phase spectra and inverting them,
//! so the realized power per frequency bin follows the recipe exactly.

mod render;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, seeded};
use crate::signal_io::{Channel, Cohort, Label, Recording, SignalError, WORKING_RATE_HZ};

pub use render::{band_limited_noise, shaped_noise};

/// Band targets `(delta, theta, alpha, beta)` of a healthy central channel.
pub const NORMAL_CENTRAL: [f64; 4] = [0.10, 0.20, 0.45, 0.25];
/// Band targets of a central channel at severity 1.
pub const SEVERE_CENTRAL: [f64; 4] = [0.45, 0.35, 0.15, 0.05];
/// Band targets of a healthy occipital channel.
pub const NORMAL_OCCIPITAL: [f64; 4] = [0.08, 0.17, 0.52, 0.23];
/// Fraction of the stroke effect that reaches OZ.
pub const OCCIPITAL_EFFECT: f64 = 0.4;

/// Band edges used by the generator, matching the feature bands.
pub const BAND_EDGES_HZ: [f64; 5] = [0.5, 4.0, 8.0, 13.0, 20.0];

/// Target BSI for a severity and asymmetry scale, from the line
/// `BSI = 0.044 + 0.0077 * NIHSS` with `NIHSS = 20 * severity`.
pub fn target_bsi(severity: f64, asymmetry: f64) -> f64 {
    ((0.044 + 0.0077 * 20.0 * severity).clamp(0.0, 0.6)) * asymmetry
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectSpec {
    pub subject_id: String,
    pub label: Label,
    /// 0 for normals, in `(0, 1]` for strokes.
    pub cbf_severity: f64,
    /// Scales the target BSI, in `[0, 1]`.
    pub asymmetry: f64,
    pub seed: u64,
    pub duration_s: f64,
    pub rate_hz: f64,
    /// Standard deviation of the individual slowing offset (0 disables it).
    pub variability: f64,
}

impl SubjectSpec {
    pub fn normal(seed: u64) -> SubjectSpec {
        SubjectSpec {
            subject_id: format!("subject-{seed}"),
            label: Label::Normal,
            cbf_severity: 0.0,
            asymmetry: 0.3,
            seed,
            duration_s: 900.0,
            rate_hz: WORKING_RATE_HZ,
            variability: 0.0,
        }
    }

    pub fn stroke(seed: u64, severity: f64) -> SubjectSpec {
        SubjectSpec {
            label: Label::Stroke,
            cbf_severity: severity,
            asymmetry: 0.85,
            ..SubjectSpec::normal(seed)
        }
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        let bad = |reason: &str| SignalError::InvalidChannel {
            subject: self.subject_id.clone(),
            channel: "*".into(),
            reason: reason.into(),
        };
        if !(0.0..=1.0).contains(&self.cbf_severity) || !(0.0..=1.0).contains(&self.asymmetry) {
            return Err(bad("severity and asymmetry must lie in [0, 1]"));
        }
        if (self.label == Label::Normal) != (self.cbf_severity == 0.0) {
            return Err(bad("normals have severity 0, strokes a positive severity"));
        }
        if !(self.rate_hz >= 48.0 && self.duration_s * self.rate_hz >= 512.0) {
            return Err(bad("need a rate of at least 48 Hz and at least 512 samples"));
        }
        if !(self.variability >= 0.0 && self.variability.is_finite()) {
            return Err(bad("variability must be a finite non-negative number"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRecipe {
    /// C3 and C4 relative band powers (delta, theta, alpha, beta).
    pub band_targets: [f64; 4],
    /// OZ relative band powers.
    pub occipital_targets: [f64; 4],
    /// Within-band tilt exponent of C3/C4.
    pub one_over_f_exponent: f64,
    pub occipital_exponent: f64,
    /// Amplitude gain of C4 relative to C3.
    pub right_gain: f64,
    pub target_bsi: f64,
    /// Standard deviation of C3 in microvolts.
    pub eeg_amplitude: f64,
    /// Standard deviation of the EOG drift in microvolts.
    pub eog_amplitude: f64,
    /// Share of the EOG drift common to LEOG and REOG.
    pub eog_coupling: f64,
}

/// Geometric interpolation between two band distributions; `u` may leave
/// `[0, 1]` and the result stays a valid distribution.
fn morph(from: &[f64; 4], to: &[f64; 4], u: f64) -> [f64; 4] {
    let mut w = [0.0; 4];
    for i in 0..4 {
        w[i] = (from[i].ln() + u * (to[i].ln() - from[i].ln())).exp();
    }
    let s: f64 = w.iter().sum();
    w.map(|v| v / s)
}

pub fn make_recipe(spec: &SubjectSpec) -> SpectralRecipe {
    let mut rng = seeded(derive_seed(spec.seed, 0x7EC1));
    let normal = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };
    let s = spec.cbf_severity;
    let offset = spec.variability * normal(&mut rng);
    let jitter = 0.15 * spec.variability;
    let u_central = s + offset + jitter * normal(&mut rng);
    let u_occipital = OCCIPITAL_EFFECT * s + offset + jitter * normal(&mut rng);

    let t = target_bsi(s, spec.asymmetry);
    let amp_noise = normal(&mut rng);
    let eog_noise = normal(&mut rng);
    let coupling_draw: f64 = rng.random();
    let eog_coupling = match spec.label {
        Label::Normal => 0.70 + 0.25 * coupling_draw,
        Label::Stroke => 0.50 + 0.35 * coupling_draw,
    };
    SpectralRecipe {
        band_targets: morph(&NORMAL_CENTRAL, &SEVERE_CENTRAL, u_central),
        occipital_targets: morph(&NORMAL_OCCIPITAL, &SEVERE_CENTRAL, u_occipital),
        one_over_f_exponent: 0.5 + 1.0 * u_central.max(-0.4),
        occipital_exponent: 0.5 + 1.0 * u_occipital.max(-0.4),
        right_gain: ((1.0 + t) / (1.0 - t)).sqrt(),
        target_bsi: t,
        eeg_amplitude: 20.0 * (0.25 * amp_noise).exp(),
        eog_amplitude: 40.0 * (0.3 * eog_noise).exp(),
        eog_coupling,
    }
}

/// Renders all five channels (C3, C4, OZ, LEOG, REOG) of one subject.
pub fn synth_recording(spec: &SubjectSpec) -> Result<Recording, SignalError> {
    spec.validate()?;
    let recipe = make_recipe(spec);
    let n = (spec.duration_s * spec.rate_hz).round() as usize;
    let fs = spec.rate_hz;
    let stream = |k: u64| seeded(derive_seed(spec.seed, k));

    let central = |gain: f64, k: u64| {
        render::eeg_channel(n, fs, &recipe.band_targets, recipe.one_over_f_exponent, recipe.eeg_amplitude * gain, &mut stream(k))
    };
    let c3 = central(1.0, 1);
    let c4 = central(recipe.right_gain, 2);
    let oz = render::eeg_channel(
        n,
        fs,
        &recipe.occipital_targets,
        recipe.occipital_exponent,
        recipe.eeg_amplitude,
        &mut stream(3),
    );

    let drift = |k: u64| band_limited_noise(n, fs, 0.05, 1.0, recipe.eog_amplitude, &mut stream(k));
    let common = drift(4);
    let left_own = drift(5);
    let right_own = drift(6);
    let rho = recipe.eog_coupling;
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    const LEAK: f64 = 0.15;
    const FLOOR_UV: f64 = 2.0;
    let mut floor_rng = stream(7);
    let mut eog = |own: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let w: f64 = floor_rng.sample(StandardNormal);
                a * common[i] + b * own[i] + LEAK * c3[i] + FLOOR_UV * w
            })
            .collect()
    };
    let leog = eog(&left_own);
    let reog = eog(&right_own);

    Recording::new(
        spec.subject_id.clone(),
        spec.label,
        vec![
            Channel::new("C3", fs, c3),
            Channel::new("C4", fs, c4),
            Channel::new("OZ", fs, oz),
            Channel::new("LEOG", fs, leog),
            Channel::new("REOG", fs, reog),
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub duration_s: f64,
    pub rate_hz: f64,
    /// Severity interval of regular stroke subjects.
    pub severity_range: (f64, f64),
    /// Share of stroke subjects drawn from the early-stage interval `(0, 0.2]`.
    pub early_stage_fraction: f64,
    pub variability: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            duration_s: 900.0,
            rate_hz: WORKING_RATE_HZ,
            severity_range: (0.2, 1.0),
            early_stage_fraction: 0.1,
            variability: 0.35,
        }
    }
}

/// Subject specifications of a cohort: normals `N01..`, then strokes `S01..`.
pub fn cohort_specs(n_normal: usize, n_stroke: usize, master_seed: u64, opts: &SynthOptions) -> Vec<SubjectSpec> {
    let mut rng = seeded(master_seed);
    let n_early = (opts.early_stage_fraction * n_stroke as f64).round() as usize;
    let (lo, hi) = opts.severity_range;
    let mut specs = Vec::with_capacity(n_normal + n_stroke);
    for i in 0..n_normal {
        specs.push(SubjectSpec {
            subject_id: format!("N{:02}", i + 1),
            label: Label::Normal,
            cbf_severity: 0.0,
            asymmetry: 0.6 * rng.random::<f64>(),
            seed: derive_seed(master_seed, i as u64),
            duration_s: opts.duration_s,
            rate_hz: opts.rate_hz,
            variability: opts.variability,
        });
    }
    for j in 0..n_stroke {
        let u: f64 = rng.random();
        let severity = if j < n_early {
            0.2 * (1.0 - u)
        } else {
            lo + (hi - lo) * u
        };
        specs.push(SubjectSpec {
            subject_id: format!("S{:02}", j + 1),
            label: Label::Stroke,
            cbf_severity: severity.clamp(f64::MIN_POSITIVE, 1.0),
            asymmetry: 0.7 + 0.3 * rng.random::<f64>(),
            seed: derive_seed(master_seed, (n_normal + j) as u64),
            duration_s: opts.duration_s,
            rate_hz: opts.rate_hz,
            variability: opts.variability,
        });
    }
    specs
}

pub fn synth_cohort(n_normal: usize, n_stroke: usize, master_seed: u64, opts: &SynthOptions) -> Result<Cohort, SignalError> {
    let specs = cohort_specs(n_normal, n_stroke, master_seed, opts);
    let recordings = specs
        .par_iter()
        .map(synth_recording)
        .collect::<Result<Vec<_>, _>>()?;
    Cohort::new(recordings, format!("synthetic seed {master_seed}"))
}
