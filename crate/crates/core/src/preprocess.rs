//! Contact detection, fixed-window truncation, per-modality normalization,
//! and feature-vector assembly.
//!
//! The analysis window runs from 0.2 s before detected contact to 4 s after
//! (2100 samples at 500 Hz per modality); force, microphone, and acceleration
//! windows are normalized per modality and concatenated into one 6300-value
//! feature vector. Thermal channels are carried through the dataset but take
//! no part in the feature vector.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{ChannelKind, RawTrial};

/// Samples kept before the detected contact index (0.2 s at 500 Hz).
pub const PRE_WINDOW_SAMPLES: usize = 100;
/// Samples kept from the detected contact index onward (4 s at 500 Hz).
pub const POST_WINDOW_SAMPLES: usize = 2000;
/// Total window length per modality.
pub const WINDOW_SAMPLES: usize = PRE_WINDOW_SAMPLES + POST_WINDOW_SAMPLES;
/// Feature-vector length: force, mic, and accel windows concatenated.
pub const FEATURE_LEN: usize = 3 * WINDOW_SAMPLES;

/// The three channels that enter the feature vector, in concatenation order.
pub const FEATURE_MODALITIES: [ChannelKind; 3] = [
    ChannelKind::Force,
    ChannelKind::Microphone,
    ChannelKind::Accelerometer,
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PreprocessError {
    #[error("no force rise above the detection threshold in the whole trial")]
    NoContactDetected,
    #[error(
        "contact at sample {index} leaves fewer than {PRE_WINDOW_SAMPLES} pre-contact samples"
    )]
    InsufficientPreContact { index: usize },
    #[error("window needs samples up to {needed}, channel has {len}")]
    InsufficientPostContact { needed: usize, len: usize },
    #[error("trial is missing channel {}", .0.name())]
    MissingChannel(ChannelKind),
    #[error("{modality} windows have zero pooled variance")]
    ZeroVariance { modality: &'static str },
    #[error("{modality} window length {got}, expected {WINDOW_SAMPLES}")]
    LengthMismatch { modality: &'static str, got: usize },
}

/// Tunable contact-detection rule: force must exceed
/// `baseline_mean + max(sigma_multiplier * baseline_std, min_threshold)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContactParams {
    /// Leading samples used to estimate the quiescent baseline.
    pub baseline_samples: usize,
    /// Threshold offset in baseline standard deviations.
    pub sigma_multiplier: f64,
    /// Absolute floor on the threshold offset, in force-channel units;
    /// rescues trials whose quantized baseline is perfectly flat.
    pub min_threshold: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        ContactParams {
            baseline_samples: 50,
            sigma_multiplier: 6.0,
            min_threshold: 0.05,
        }
    }
}

/// A detected contact instant on the 500 Hz grid, with the baseline
/// statistics that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContactEvent {
    /// First force sample above threshold.
    pub index_500hz: usize,
    /// The same instant in seconds.
    pub time: f64,
    pub detection_threshold: f64,
    pub baseline_mean: f64,
    pub baseline_std: f64,
}

/// Detects the contact instant with default [`ContactParams`].
pub fn detect_contact(trial: &RawTrial) -> Result<ContactEvent, PreprocessError> {
    detect_contact_with(trial, &ContactParams::default())
}

/// Detects contact as the first force sample exceeding a baseline-derived
/// threshold. The force channel is used as stored; run trials through a
/// [`crate::calib::Calibrations`] first if they hold raw counts, so the
/// absolute threshold floor is meaningful.
pub fn detect_contact_with(
    trial: &RawTrial,
    params: &ContactParams,
) -> Result<ContactEvent, PreprocessError> {
    let force = trial
        .channel(ChannelKind::Force)
        .ok_or(PreprocessError::MissingChannel(ChannelKind::Force))?;
    let n_base = params.baseline_samples;
    if force.samples.len() < n_base.max(PRE_WINDOW_SAMPLES) {
        return Err(PreprocessError::InsufficientPreContact {
            index: force.samples.len(),
        });
    }
    let baseline = &force.samples[..n_base];
    let baseline_mean = baseline.iter().sum::<f64>() / n_base as f64;
    let var = baseline
        .iter()
        .map(|&v| (v - baseline_mean) * (v - baseline_mean))
        .sum::<f64>()
        / n_base as f64;
    let baseline_std = libm::sqrt(var);
    let detection_threshold =
        baseline_mean + (params.sigma_multiplier * baseline_std).max(params.min_threshold);

    let index_500hz = force
        .samples
        .iter()
        .position(|&v| v > detection_threshold)
        .ok_or(PreprocessError::NoContactDetected)?;
    if index_500hz < PRE_WINDOW_SAMPLES {
        return Err(PreprocessError::InsufficientPreContact { index: index_500hz });
    }
    Ok(ContactEvent {
        index_500hz,
        time: index_500hz as f64 / force.spec.sample_rate,
        detection_threshold,
        baseline_mean,
        baseline_std,
    })
}

/// The force/mic/accel windows of one trial, each [`WINDOW_SAMPLES`] long
/// when produced by [`window_trial`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModalityWindows {
    pub trial_id: String,
    pub force: Vec<f64>,
    pub mic: Vec<f64>,
    pub accel: Vec<f64>,
}

impl ModalityWindows {
    pub fn modality(&self, kind: ChannelKind) -> &[f64] {
        match kind {
            ChannelKind::Force => &self.force,
            ChannelKind::Microphone => &self.mic,
            _ => &self.accel,
        }
    }
}

/// Cuts the fixed analysis window `[index − 0.2 s, index + 4 s)` out of each
/// 500 Hz channel.
pub fn window_trial(
    trial: &RawTrial,
    event: &ContactEvent,
) -> Result<ModalityWindows, PreprocessError> {
    let index = event.index_500hz;
    if index < PRE_WINDOW_SAMPLES {
        return Err(PreprocessError::InsufficientPreContact { index });
    }
    let start = index - PRE_WINDOW_SAMPLES;
    let needed = index + POST_WINDOW_SAMPLES;
    let mut windows: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (slot, kind) in windows.iter_mut().zip(FEATURE_MODALITIES) {
        let channel = trial
            .channel(kind)
            .ok_or(PreprocessError::MissingChannel(kind))?;
        if channel.samples.len() < needed {
            return Err(PreprocessError::InsufficientPostContact {
                needed,
                len: channel.samples.len(),
            });
        }
        *slot = channel.samples[start..needed].to_vec();
    }
    let [force, mic, accel] = windows;
    Ok(ModalityWindows {
        trial_id: trial.trial_id.clone(),
        force,
        mic,
        accel,
    })
}

/// How normalization divides out the pooled spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NormalizationMode {
    /// `(x − mean) / variance` — the default.
    DivideByVariance,
    /// `(x − mean) / std` — conventional standardization.
    DivideByStd,
}

/// Pooled mean and population variance of one modality over a training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalityStats {
    pub mean: f64,
    pub variance: f64,
}

/// Per-modality normalization statistics pooled over all samples of all
/// training windows.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationStats {
    pub mode: NormalizationMode,
    pub force: ModalityStats,
    pub mic: ModalityStats,
    pub accel: ModalityStats,
}

impl NormalizationStats {
    pub fn modality(&self, kind: ChannelKind) -> &ModalityStats {
        match kind {
            ChannelKind::Force => &self.force,
            ChannelKind::Microphone => &self.mic,
            _ => &self.accel,
        }
    }

    fn transform(&self, kind: ChannelKind, x: f64) -> f64 {
        let stats = self.modality(kind);
        let denom = match self.mode {
            NormalizationMode::DivideByVariance => stats.variance,
            NormalizationMode::DivideByStd => libm::sqrt(stats.variance),
        };
        (x - stats.mean) / denom
    }
}

/// Pools every sample of every window per modality into population
/// (divide-by-N) mean/variance statistics. Window order does not matter.
pub fn fit_normalization(
    windows: &[ModalityWindows],
    mode: NormalizationMode,
) -> Result<NormalizationStats, PreprocessError> {
    let mut stats = [ModalityStats {
        mean: 0.0,
        variance: 0.0,
    }; 3];
    for (slot, kind) in stats.iter_mut().zip(FEATURE_MODALITIES) {
        let mut n = 0usize;
        let mut sum = 0.0;
        for w in windows {
            let xs = w.modality(kind);
            n += xs.len();
            sum += xs.iter().sum::<f64>();
        }
        if n == 0 {
            return Err(PreprocessError::ZeroVariance {
                modality: kind.name(),
            });
        }
        let mean = sum / n as f64;
        let mut sq = 0.0;
        for w in windows {
            sq += w
                .modality(kind)
                .iter()
                .map(|&x| (x - mean) * (x - mean))
                .sum::<f64>();
        }
        let variance = sq / n as f64;
        if variance <= 0.0 {
            return Err(PreprocessError::ZeroVariance {
                modality: kind.name(),
            });
        }
        *slot = ModalityStats { mean, variance };
    }
    let [force, mic, accel] = stats;
    Ok(NormalizationStats {
        mode,
        force,
        mic,
        accel,
    })
}

/// One classifier input: the three normalized windows concatenated in the
/// fixed order force, mic, accel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub trial_id: String,
    /// +1 foreground, −1 background.
    pub label: i32,
}

/// Normalizes each window with `stats` and concatenates force ‖ mic ‖ accel.
/// Exposed separately from [`assemble_feature`] so prediction paths can build
/// the value vector for unlabeled trials.
pub fn normalize_windows(
    windows: &ModalityWindows,
    stats: &NormalizationStats,
) -> Result<Vec<f64>, PreprocessError> {
    let mut values = Vec::with_capacity(FEATURE_LEN);
    for kind in FEATURE_MODALITIES {
        let xs = windows.modality(kind);
        if xs.len() != WINDOW_SAMPLES {
            return Err(PreprocessError::LengthMismatch {
                modality: kind.name(),
                got: xs.len(),
            });
        }
        values.extend(xs.iter().map(|&x| stats.transform(kind, x)));
    }
    Ok(values)
}

/// Builds the labeled feature vector of one trial.
pub fn assemble_feature(
    windows: &ModalityWindows,
    stats: &NormalizationStats,
    label: i32,
) -> Result<FeatureVector, PreprocessError> {
    let values = normalize_windows(windows, stats)?;
    Ok(FeatureVector {
        values,
        trial_id: windows.trial_id.clone(),
        label,
    })
}
