//! Recording data model, the `.ssig` cohort file format, and resampling to
//! the 64 Hz working rate.

mod format;
mod resample;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use format::{load_cohort, load_cohort_at, read_cohort, save_cohort, write_cohort};
pub use resample::{anti_alias_taps, downsample, ANTI_ALIAS_TAPS};

/// Sample rate every channel is normalized to before feature extraction.
pub const WORKING_RATE_HZ: f64 = 64.0;

/// Channels the feature pipeline reads. `C4` is optional and only used for
/// the brain symmetry index.
pub const REQUIRED_CHANNELS: [&str; 4] = ["C3", "OZ", "LEOG", "REOG"];

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("malformed cohort file: {0}")]
    MalformedFile(String),
    #[error("missing required channel {0:?}")]
    MissingChannel(String),
    #[error("channel {channel:?} appears more than once in subject {subject:?}")]
    DuplicateChannel { subject: String, channel: String },
    #[error("duplicate subject id {0:?}")]
    DuplicateSubject(String),
    #[error("channel {channel:?} of subject {subject:?}: {reason}")]
    InvalidChannel {
        subject: String,
        channel: String,
        reason: String,
    },
    #[error("channel durations differ by more than one sample in subject {0:?}")]
    DurationMismatch(String),
    #[error("sample rate {from_hz} Hz is not an integer multiple of {to_hz} Hz")]
    NonIntegerFactor { from_hz: f64, to_hz: f64 },
    #[error("empty input signal")]
    EmptyInput,
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
}

/// Class label. The numeric value is the on-disk and CSV encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Normal = 0,
    Stroke = 1,
}

impl Label {
    pub fn from_u8(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::Normal),
            1 => Some(Label::Stroke),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Label {
        match self {
            Label::Normal => Label::Stroke,
            Label::Stroke => Label::Normal,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Normal => f.write_str("normal"),
            Label::Stroke => f.write_str("stroke"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub sample_rate_hz: f64,
    pub samples: Vec<f64>,
}

impl Channel {
    pub fn new(name: impl Into<String>, sample_rate_hz: f64, samples: Vec<f64>) -> Self {
        Channel {
            name: name.into(),
            sample_rate_hz,
            samples,
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Same data resampled to `to_hz`. A channel already at `to_hz` is
    /// copied unchanged.
    pub fn resampled(&self, to_hz: f64) -> Result<Channel, SignalError> {
        if self.sample_rate_hz == to_hz {
            return Ok(self.clone());
        }
        Ok(Channel {
            name: self.name.clone(),
            sample_rate_hz: to_hz,
            samples: downsample(&self.samples, self.sample_rate_hz, to_hz)?,
        })
    }
}

/// One subject's multichannel record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    pub subject_id: String,
    pub label: Label,
    pub channels: Vec<Channel>,
}

impl Recording {
    /// Builds a recording and checks its invariants.
    pub fn new(
        subject_id: impl Into<String>,
        label: Label,
        channels: Vec<Channel>,
    ) -> Result<Recording, SignalError> {
        let rec = Recording {
            subject_id: subject_id.into(),
            label,
            channels,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        let mut seen = HashSet::new();
        for ch in &self.channels {
            if !seen.insert(ch.name.as_str()) {
                return Err(SignalError::DuplicateChannel {
                    subject: self.subject_id.clone(),
                    channel: ch.name.clone(),
                });
            }
            let invalid = |reason: &str| SignalError::InvalidChannel {
                subject: self.subject_id.clone(),
                channel: ch.name.clone(),
                reason: reason.to_string(),
            };
            if !(ch.sample_rate_hz.is_finite() && ch.sample_rate_hz > 0.0) {
                return Err(invalid("sample rate must be positive and finite"));
            }
            if ch.samples.is_empty() {
                return Err(invalid("channel has no samples"));
            }
        }
        for name in REQUIRED_CHANNELS {
            if !seen.contains(name) {
                return Err(SignalError::MissingChannel(name.to_string()));
            }
        }
        // durations agree within one sample period of the slower channel
        if let Some(first) = self.channels.first() {
            for ch in &self.channels[1..] {
                let slack = 1.0 / first.sample_rate_hz.min(ch.sample_rate_hz);
                if (ch.duration_s() - first.duration_s()).abs() > slack * (1.0 + 1e-9) {
                    return Err(SignalError::DurationMismatch(self.subject_id.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn channel(&self, name: &str) -> Option<&Channel> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&Channel, SignalError> {
        self.channel(name)
            .ok_or_else(|| SignalError::MissingChannel(name.to_string()))
    }

    /// Every channel brought to `rate_hz` by [`downsample`].
    pub fn at_rate(&self, rate_hz: f64) -> Result<Recording, SignalError> {
        let channels = self
            .channels
            .iter()
            .map(|c| c.resampled(rate_hz))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Recording {
            subject_id: self.subject_id.clone(),
            label: self.label,
            channels,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortMeta {
    pub source: String,
    pub working_rate_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    pub recordings: Vec<Recording>,
    pub meta: CohortMeta,
}

impl Cohort {
    pub fn new(recordings: Vec<Recording>, source: impl Into<String>) -> Result<Cohort, SignalError> {
        let cohort = Cohort {
            recordings,
            meta: CohortMeta {
                source: source.into(),
                working_rate_hz: WORKING_RATE_HZ,
            },
        };
        cohort.validate()?;
        Ok(cohort)
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        let mut ids = HashSet::new();
        for rec in &self.recordings {
            if !ids.insert(rec.subject_id.as_str()) {
                return Err(SignalError::DuplicateSubject(rec.subject_id.clone()));
            }
            rec.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.recordings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recordings.is_empty()
    }

    /// Normalizes every channel of every recording to `rate_hz`.
    pub fn at_rate(&self, rate_hz: f64) -> Result<Cohort, SignalError> {
        let recordings = self
            .recordings
            .iter()
            .map(|r| r.at_rate(rate_hz))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Cohort {
            recordings,
            meta: CohortMeta {
                source: self.meta.source.clone(),
                working_rate_hz: rate_hz,
            },
        })
    }

    pub fn label_counts(&self) -> (usize, usize) {
        let strokes = self
            .recordings
            .iter()
            .filter(|r| r.label == Label::Stroke)
            .count();
        (self.recordings.len() - strokes, strokes)
    }
}
