//! Domain types for trials and datasets: channel descriptors, labeled
//! multi-rate recordings, and validation.
//!
//! Everything here is an immutable in-memory value; the on-disk manifest and
//! trial CSV formats live in the companion `tactile-pipe` crate. Validation
//! returns violations as data rather than errors so callers can report all
//! problems at once.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Manifest schema version understood by this crate.
pub const MANIFEST_VERSION: u32 = 1;

/// The six recorded channels. Force, microphone, and accelerometer are the
/// fast contact modalities (500 Hz); the thermal channels run at 100 Hz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ChannelKind {
    #[cfg_attr(feature = "serde", serde(rename = "force"))]
    Force,
    #[cfg_attr(feature = "serde", serde(rename = "mic"))]
    Microphone,
    #[cfg_attr(feature = "serde", serde(rename = "accel"))]
    Accelerometer,
    #[cfg_attr(feature = "serde", serde(rename = "heat"))]
    HeatTransfer,
    #[cfg_attr(feature = "serde", serde(rename = "therm"))]
    FastThermistor,
    #[cfg_attr(feature = "serde", serde(rename = "ambient"))]
    AmbientTemp,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 6] = [
        ChannelKind::Force,
        ChannelKind::Microphone,
        ChannelKind::Accelerometer,
        ChannelKind::HeatTransfer,
        ChannelKind::FastThermistor,
        ChannelKind::AmbientTemp,
    ];

    /// Canonical short name used in trial CSVs and calibration files.
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Force => "force",
            ChannelKind::Microphone => "mic",
            ChannelKind::Accelerometer => "accel",
            ChannelKind::HeatTransfer => "heat",
            ChannelKind::FastThermistor => "therm",
            ChannelKind::AmbientTemp => "ambient",
        }
    }

    pub fn from_name(name: &str) -> Option<ChannelKind> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Acquisition rate fixed by the device: 500 Hz for contact modalities,
    /// 100 Hz for thermal ones.
    pub fn sample_rate(self) -> f64 {
        match self {
            ChannelKind::Force | ChannelKind::Microphone | ChannelKind::Accelerometer => 500.0,
            _ => 100.0,
        }
    }

    /// Unit a calibrated (non-quantized) channel of this kind carries.
    pub fn engineering_unit(self) -> Unit {
        match self {
            ChannelKind::Force => Unit::Newtons,
            ChannelKind::Microphone => Unit::Volts,
            ChannelKind::Accelerometer => Unit::G,
            ChannelKind::HeatTransfer | ChannelKind::FastThermistor | ChannelKind::AmbientTemp => {
                Unit::Celsius
            }
        }
    }
}

/// Physical unit of a channel's sample values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Unit {
    AdcCounts,
    Newtons,
    Celsius,
    Volts,
    /// Acceleration in multiples of standard gravity.
    G,
}

impl Unit {
    pub fn name(self) -> &'static str {
        match self {
            Unit::AdcCounts => "adc_counts",
            Unit::Newtons => "newtons",
            Unit::Celsius => "celsius",
            Unit::Volts => "volts",
            Unit::G => "g",
        }
    }
}

/// Static description of one channel: what it measures, how fast, in what unit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    /// Samples per second; fixed per kind on the real device.
    pub sample_rate: f64,
    pub unit: Unit,
}

impl ChannelSpec {
    /// Spec for a raw quantized channel (ADC counts at the kind's rate).
    pub fn quantized(kind: ChannelKind) -> Self {
        ChannelSpec {
            kind,
            sample_rate: kind.sample_rate(),
            unit: Unit::AdcCounts,
        }
    }

    /// Spec for an idealized or calibrated channel in engineering units.
    pub fn engineering(kind: ChannelKind) -> Self {
        ChannelSpec {
            kind,
            sample_rate: kind.sample_rate(),
            unit: kind.engineering_unit(),
        }
    }
}

/// One channel's spec plus its sample sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub spec: ChannelSpec,
    pub samples: Vec<f64>,
}

/// Whether a trial touched the target object or the clutter next to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Role {
    Foreground,
    Background,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Foreground => "foreground",
            Role::Background => "background",
        }
    }

    pub fn from_name(name: &str) -> Option<Role> {
        match name {
            "foreground" => Some(Role::Foreground),
            "background" => Some(Role::Background),
            _ => None,
        }
    }

    /// Classifier label convention: foreground is the positive class.
    pub fn label(self) -> i32 {
        match self {
            Role::Foreground => 1,
            Role::Background => -1,
        }
    }
}

/// One labeled recording of a single contact event, all six channels.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrial {
    pub trial_id: String,
    pub object_label: String,
    pub role: Role,
    pub channels: BTreeMap<ChannelKind, Channel>,
    /// Average approach velocity over the final stretch before contact, m/s.
    pub pre_contact_velocity: f64,
    /// Nominal recording length in seconds.
    pub duration: f64,
    /// ADC resolution of the stored samples: 12 for device-faithful counts,
    /// 0 for unquantized engineering units.
    pub adc_bits: u32,
    /// Simulator seed the trial was generated from; `None` for external data.
    pub seed: Option<u64>,
}

impl RawTrial {
    pub fn channel(&self, kind: ChannelKind) -> Option<&Channel> {
        self.channels.get(&kind)
    }
}

/// All trials of one foreground-vs-background recognition pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub pair_name: String,
    pub manifest_version: u32,
    pub trials: Vec<RawTrial>,
}

impl Dataset {
    pub fn new(pair_name: impl Into<String>) -> Self {
        Dataset {
            pair_name: pair_name.into(),
            manifest_version: MANIFEST_VERSION,
            trials: Vec::new(),
        }
    }

    /// Checks dataset-level invariants plus every trial's invariants.
    /// Empty iff the dataset is well-formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.pair_name.is_empty() {
            out.push(Violation::new("pair_name", "must be non-empty"));
        }
        if self.manifest_version != MANIFEST_VERSION {
            out.push(Violation::new(
                "manifest_version",
                format!(
                    "unknown version {} (expected {})",
                    self.manifest_version, MANIFEST_VERSION
                ),
            ));
        }
        for (i, a) in self.trials.iter().enumerate() {
            if self.trials[..i].iter().any(|b| b.trial_id == a.trial_id) {
                out.push(Violation::new(
                    format!("trials[{i}].trial_id"),
                    format!("duplicate trial id {:?}", a.trial_id),
                ));
            }
        }
        // Label/role structure only applies once there is data; an empty
        // dataset is a valid (if useless) pair.
        if !self.trials.is_empty() {
            let mut label_roles: BTreeMap<&str, Role> = BTreeMap::new();
            for (i, t) in self.trials.iter().enumerate() {
                match label_roles.get(t.object_label.as_str()) {
                    None => {
                        label_roles.insert(&t.object_label, t.role);
                    }
                    Some(role) if *role != t.role => {
                        out.push(Violation::new(
                            format!("trials[{i}].role"),
                            format!(
                                "label {:?} appears as both {} and {}",
                                t.object_label,
                                role.name(),
                                t.role.name()
                            ),
                        ));
                    }
                    Some(_) => {}
                }
            }
            if label_roles.len() != 2 {
                out.push(Violation::new(
                    "trials",
                    format!(
                        "expected exactly 2 object labels, found {}",
                        label_roles.len()
                    ),
                ));
            } else {
                let roles: Vec<Role> = label_roles.values().copied().collect();
                if roles[0] == roles[1] {
                    out.push(Violation::new(
                        "trials",
                        format!(
                            "both labels are {}; need one foreground and one background",
                            roles[0].name()
                        ),
                    ));
                }
            }
        }
        for (i, t) in self.trials.iter().enumerate() {
            for v in validate_trial(t) {
                out.push(Violation::new(format!("trials[{i}].{}", v.field), v.rule));
            }
        }
        out
    }
}

/// One broken invariant: which field, which rule. Violations are data, not
/// errors, so validators can report everything at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Checks every RawTrial invariant; empty iff the trial is well-formed.
pub fn validate_trial(trial: &RawTrial) -> Vec<Violation> {
    let mut out = Vec::new();
    if trial.trial_id.is_empty() {
        out.push(Violation::new("trial_id", "must be non-empty"));
    }
    if trial.object_label.is_empty() {
        out.push(Violation::new("object_label", "must be non-empty"));
    }
    if !trial.pre_contact_velocity.is_finite() || trial.pre_contact_velocity <= 0.0 {
        out.push(Violation::new(
            "pre_contact_velocity",
            format!(
                "must be a positive finite number, got {}",
                trial.pre_contact_velocity
            ),
        ));
    }
    if !trial.duration.is_finite() || trial.duration <= 0.0 {
        out.push(Violation::new(
            "duration",
            format!("must be a positive finite number, got {}", trial.duration),
        ));
    }
    if trial.adc_bits != 0 && !(1..=16).contains(&trial.adc_bits) {
        out.push(Violation::new(
            "adc_bits",
            format!("must be 0 (unquantized) or 1..=16, got {}", trial.adc_bits),
        ));
    }

    for kind in ChannelKind::ALL {
        let Some(ch) = trial.channels.get(&kind) else {
            out.push(Violation::new(
                "channels",
                format!("missing channel {}", kind.name()),
            ));
            continue;
        };
        let field = |suffix: &str| format!("channels.{}.{suffix}", kind.name());
        if ch.spec.kind != kind {
            out.push(Violation::new(
                field("kind"),
                format!("spec kind {} does not match map key", ch.spec.kind.name()),
            ));
        }
        if ch.spec.sample_rate != kind.sample_rate() {
            out.push(Violation::new(
                field("sample_rate"),
                format!(
                    "must be {} Hz for {}, got {}",
                    kind.sample_rate(),
                    kind.name(),
                    ch.spec.sample_rate
                ),
            ));
        }
        if let Some(i) = ch.samples.iter().position(|v| !v.is_finite()) {
            out.push(Violation::new(
                field("samples"),
                format!("non-finite value at index {i}"),
            ));
        }
        // Duration consistency within one sample either way.
        if trial.duration > 0.0 {
            let expected = trial.duration * kind.sample_rate();
            if libm::fabs(ch.samples.len() as f64 - expected) > 1.0 {
                out.push(Violation::new(
                    field("samples"),
                    format!(
                        "length {} inconsistent with duration {} s at {} Hz (expected {expected} +/- 1)",
                        ch.samples.len(),
                        trial.duration,
                        kind.sample_rate()
                    ),
                ));
            }
        }
        if trial.adc_bits > 0 {
            if ch.spec.unit != Unit::AdcCounts {
                out.push(Violation::new(
                    field("unit"),
                    format!(
                        "quantized trials store adc_counts, got {}",
                        ch.spec.unit.name()
                    ),
                ));
            } else if (1..=16).contains(&trial.adc_bits) {
                let full_scale = ((1u32 << trial.adc_bits) - 1) as f64;
                if let Some(i) = ch
                    .samples
                    .iter()
                    .position(|v| !(0.0..=full_scale).contains(v))
                {
                    out.push(Violation::new(
                        field("samples"),
                        format!(
                            "value {} at index {i} outside [0, {full_scale}] for {}-bit data",
                            ch.samples[i], trial.adc_bits
                        ),
                    ));
                }
            }
        }
    }

    // Per-rate length consistency across channels.
    for rate in [500.0, 100.0] {
        let lens: Vec<(ChannelKind, usize)> = ChannelKind::ALL
            .into_iter()
            .filter(|k| k.sample_rate() == rate)
            .filter_map(|k| trial.channels.get(&k).map(|c| (k, c.samples.len())))
            .collect();
        if let Some(&(first_kind, first_len)) = lens.first() {
            for &(kind, len) in &lens[1..] {
                if len != first_len {
                    out.push(Violation::new(
                        format!("channels.{}.samples", kind.name()),
                        format!(
                            "length {len} differs from {} ({first_len}) at {rate} Hz",
                            first_kind.name()
                        ),
                    ));
                }
            }
        }
    }

    out
}
