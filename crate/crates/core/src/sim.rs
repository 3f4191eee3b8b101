//! Physics-informed generator of synthetic labeled trials.
//!
//! Each trial is a deterministic function of (profile, velocity, duration,
//! seed). Stiff, immobile objects produce large forces with steep rise; soft,
//! mobile objects produce small, slow ramps. The microphone rings at the
//! object's resonance with its damping; the accelerometer carries an impact
//! spike plus the same ring; the thermal channels cool the heated sensor
//! toward the surface at a rate set by effusivity. Randomness is split into
//! one fixed ChaCha stream per channel (plus one for trial metadata and one
//! for session planning), so adding draws to one channel can never perturb
//! another.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::calib::{CalibrationModel, Calibrations};
use crate::dataset::{Channel, ChannelKind, ChannelSpec, Dataset, RawTrial, Role};

/// Trials must contain the full analysis window (0.2 s pre + 4 s post) after
/// the latest possible contact draw, with margin for detection lag.
pub const MIN_TRIAL_DURATION: f64 = 4.5;

/// Fixed ChaCha stream indices: one per channel in [`ChannelKind::ALL`]
/// order, then trial metadata, then session planning.
const META_STREAM: u64 = 6;
const SESSION_STREAM: u64 = 7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid profile {name:?}: {reason}")]
    InvalidProfile { name: String, reason: String },
    #[error("approach velocity must be positive, got {0}")]
    NonPositiveVelocity(f64),
    #[error("trial duration {got} s is below the minimum {MIN_TRIAL_DURATION} s")]
    DurationTooShort { got: f64 },
    #[error("invalid session protocol: {0}")]
    InvalidProtocol(String),
}

/// Mechanical and thermal caricature of one household object.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectProfile {
    pub name: String,
    /// Dimensionless contact stiffness in (0, 1]; 1 ≈ rigid countertop.
    pub stiffness: f64,
    /// 0 = immobile, 1 = freely pushed aside; relieves contact force.
    pub mobility: f64,
    /// Ring-down decay rate, 1/s.
    pub damping: f64,
    /// Acoustic ring frequency, Hz; must stay below the 250 Hz Nyquist limit
    /// of the 500 Hz channels.
    pub resonance: f64,
    /// Dimensionless in (0, 1]; 1 cools the heated sensor fully and fast.
    pub thermal_effusivity: f64,
    pub surface_temp: f64,
    pub force_noise_std: f64,
    pub mic_noise_std: f64,
    pub accel_noise_std: f64,
}

impl ObjectProfile {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |reason: &str| {
            Err(SimError::InvalidProfile {
                name: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        if self.name.is_empty() {
            return fail("name must be non-empty");
        }
        let finite = [
            self.stiffness,
            self.mobility,
            self.damping,
            self.resonance,
            self.thermal_effusivity,
            self.surface_temp,
            self.force_noise_std,
            self.mic_noise_std,
            self.accel_noise_std,
        ]
        .into_iter()
        .all(f64::is_finite);
        if !finite {
            return fail("all parameters must be finite");
        }
        if !(self.stiffness > 0.0 && self.stiffness <= 1.0) {
            return fail("stiffness must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.mobility) {
            return fail("mobility must lie in [0, 1]");
        }
        if self.damping <= 0.0 {
            return fail("damping must be positive");
        }
        if !(self.resonance > 0.0 && self.resonance < 250.0) {
            return fail("resonance must lie in (0, 250) Hz");
        }
        if !(self.thermal_effusivity > 0.0 && self.thermal_effusivity <= 1.0) {
            return fail("thermal_effusivity must lie in (0, 1]");
        }
        if [
            self.force_noise_std,
            self.mic_noise_std,
            self.accel_noise_std,
        ]
        .iter()
        .any(|&s| s < 0.0)
        {
            return fail("noise standard deviations must be nonnegative");
        }
        Ok(())
    }
}

/// The acquisition protocol of one recording session for an object pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SessionProtocol {
    pub trials_per_object: usize,
    pub trial_duration: f64,
    /// Uniform range the approach velocity is drawn from, m/s.
    pub velocity_range: (f64, f64),
    /// Pause between trials, s; recorded for provenance, not simulated.
    pub inter_trial_wait: f64,
    /// Sensor reheat pause between objects, s; provenance only.
    pub reheat_wait: f64,
    pub seed: u64,
}

impl Default for SessionProtocol {
    fn default() -> Self {
        SessionProtocol {
            trials_per_object: 10,
            trial_duration: 5.0,
            velocity_range: (0.3, 0.7),
            inter_trial_wait: 10.0,
            reheat_wait: 180.0,
            seed: 0,
        }
    }
}

impl SessionProtocol {
    fn validate(&self) -> Result<(), SimError> {
        if self.trials_per_object < 1 {
            return Err(SimError::InvalidProtocol(
                "trials_per_object must be at least 1".to_string(),
            ));
        }
        let (lo, hi) = self.velocity_range;
        if !lo.is_finite() || !hi.is_finite() || lo <= 0.0 {
            return Err(SimError::NonPositiveVelocity(lo));
        }
        if hi < lo {
            return Err(SimError::InvalidProtocol(format!(
                "velocity_range ({lo}, {hi}) is empty"
            )));
        }
        Ok(())
    }
}

/// Affine engineering-unit → ADC-count transfer of one channel family.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelTransfer {
    /// Counts per engineering unit.
    pub gain: f64,
    /// Counts at zero input.
    pub offset: f64,
}

impl ChannelTransfer {
    pub fn apply(&self, value: f64) -> f64 {
        self.offset + self.gain * value
    }
}

/// Every proportionality constant of the signal models, the channel
/// transfers, and the quantizer. Nothing in the generator is hard-coded.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    /// Contact time is drawn uniformly from this range, s.
    pub contact_time_range: (f64, f64),
    /// Peak force in N per unit of stiffness·velocity.
    pub force_scale: f64,
    /// Fraction of peak force relieved by a fully mobile object.
    pub mobility_relief: f64,
    /// Force rise time constant: τ = rise_time_scale / (stiffness·velocity).
    pub rise_time_scale: f64,
    /// Mic burst amplitude in V per unit of stiffness·velocity.
    pub mic_scale: f64,
    /// Impact spike amplitude in g per unit of stiffness·velocity.
    pub accel_spike_scale: f64,
    /// Spike width in s, divided by stiffness (soft objects spread it out).
    pub accel_spike_width_scale: f64,
    /// Ring-down amplitude on the accelerometer, g per stiffness·velocity.
    pub accel_ring_scale: f64,
    /// Log-normal σ of the per-trial, per-channel contact-quality gain.
    pub channel_gain_jitter: f64,
    /// Heated-element setpoint, °C.
    pub heater_temp: f64,
    /// Room/ambient temperature, °C.
    pub ambient_temp: f64,
    /// Heat-transfer cooling rate: k = heat_rate_scale · effusivity, 1/s.
    pub heat_rate_scale: f64,
    /// Surface-thermistor lag rate toward the object temperature, 1/s.
    pub therm_rate: f64,
    /// Gaussian noise on all three thermal channels, °C.
    pub thermal_noise_std: f64,
    pub force_transfer: ChannelTransfer,
    pub mic_transfer: ChannelTransfer,
    pub accel_transfer: ChannelTransfer,
    pub thermal_transfer: ChannelTransfer,
    /// ADC resolution for emitted trials; 0 emits unquantized engineering
    /// units.
    pub adc_bits: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            contact_time_range: (0.3, 0.5),
            force_scale: 40.0,
            mobility_relief: 0.7,
            rise_time_scale: 0.001,
            mic_scale: 1.0,
            accel_spike_scale: 4.0,
            accel_spike_width_scale: 0.02,
            accel_ring_scale: 2.0,
            channel_gain_jitter: 0.2,
            heater_temp: 50.0,
            ambient_temp: 24.0,
            heat_rate_scale: 2.0,
            therm_rate: 1.5,
            thermal_noise_std: 0.05,
            force_transfer: ChannelTransfer {
                gain: 40.0,
                offset: 100.0,
            },
            mic_transfer: ChannelTransfer {
                gain: 2000.0,
                offset: 2048.0,
            },
            accel_transfer: ChannelTransfer {
                gain: 400.0,
                offset: 2048.0,
            },
            thermal_transfer: ChannelTransfer {
                gain: 40.0,
                offset: 0.0,
            },
            adc_bits: 12,
        }
    }
}

impl SimConfig {
    /// Default configuration but emitting engineering units directly.
    pub fn idealized() -> Self {
        SimConfig {
            adc_bits: 0,
            ..SimConfig::default()
        }
    }

    pub fn transfer(&self, kind: ChannelKind) -> ChannelTransfer {
        match kind {
            ChannelKind::Force => self.force_transfer,
            ChannelKind::Microphone => self.mic_transfer,
            ChannelKind::Accelerometer => self.accel_transfer,
            _ => self.thermal_transfer,
        }
    }

    /// Closed-form peak force for a profile/velocity combination, before
    /// contact-quality jitter and noise.
    pub fn peak_force(&self, profile: &ObjectProfile, velocity: f64) -> f64 {
        self.force_scale
            * profile.stiffness
            * (1.0 - self.mobility_relief * profile.mobility)
            * velocity
    }

    /// Exact inverses of the affine channel transfers, as calibration models
    /// scaled to the ADC full-scale count.
    pub fn inverse_calibrations(&self) -> Calibrations {
        let bits = if self.adc_bits == 0 {
            12
        } else {
            self.adc_bits
        };
        let full_scale = ((1u64 << bits) - 1) as f64;
        let mut models = BTreeMap::new();
        for kind in ChannelKind::ALL {
            let t = self.transfer(kind);
            models.insert(
                kind,
                CalibrationModel::linear_inverse(
                    kind.engineering_unit(),
                    t.gain,
                    t.offset,
                    full_scale,
                ),
            );
        }
        Calibrations { models }
    }
}

/// Calibrations that invert the default simulator's channel transfers.
pub fn default_calibrations() -> Calibrations {
    SimConfig::default().inverse_calibrations()
}

/// A [`RawTrial`] plus the ground-truth contact time the generator used;
/// the raw trial itself carries no ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedTrial {
    pub trial: RawTrial,
    pub contact_time: f64,
}

/// Everything needed to generate one trial; plans are independent, so a
/// session can be generated in any order or in parallel and reassembled
/// deterministically by index.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub trial_id: String,
    pub profile: ObjectProfile,
    pub role: Role,
    pub velocity: f64,
    pub duration: f64,
    pub seed: u64,
}

/// Trial generator with an explicit configuration.
#[derive(Debug, Clone, Default)]
pub struct Simulator {
    pub config: SimConfig,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Self {
        Simulator { config }
    }

    /// Generates one trial. Deterministic in all arguments.
    pub fn simulate_trial(
        &self,
        profile: &ObjectProfile,
        velocity: f64,
        duration: f64,
        seed: u64,
    ) -> Result<SimulatedTrial, SimError> {
        profile.validate()?;
        if !velocity.is_finite() || velocity <= 0.0 {
            return Err(SimError::NonPositiveVelocity(velocity));
        }
        if duration.is_nan() || duration < MIN_TRIAL_DURATION {
            return Err(SimError::DurationTooShort { got: duration });
        }

        let mut meta = channel_rng(seed, META_STREAM);
        let (tc_lo, tc_hi) = self.config.contact_time_range;
        let contact_time = meta.random_range(tc_lo..tc_hi);

        let mut channels = BTreeMap::new();
        for (stream, kind) in ChannelKind::ALL.into_iter().enumerate() {
            let mut rng = channel_rng(seed, stream as u64);
            let samples =
                self.synth_channel(kind, profile, velocity, duration, contact_time, &mut rng);
            let spec = if self.config.adc_bits == 0 {
                ChannelSpec::engineering(kind)
            } else {
                ChannelSpec::quantized(kind)
            };
            channels.insert(kind, Channel { spec, samples });
        }

        let trial = RawTrial {
            trial_id: format!("sim_{seed:016x}"),
            object_label: profile.name.clone(),
            role: Role::Foreground,
            channels,
            pre_contact_velocity: velocity,
            duration,
            adc_bits: self.config.adc_bits,
            seed: Some(seed),
        };
        Ok(SimulatedTrial {
            trial,
            contact_time,
        })
    }

    fn synth_channel(
        &self,
        kind: ChannelKind,
        profile: &ObjectProfile,
        velocity: f64,
        duration: f64,
        contact_time: f64,
        rng: &mut ChaCha12Rng,
    ) -> Vec<f64> {
        let cfg = &self.config;
        let rate = kind.sample_rate();
        let n = libm::round(duration * rate) as usize;
        let drive = profile.stiffness * velocity;

        // Contact channels carry a per-trial contact-quality gain; thermal
        // channels do not. The gain is the channel stream's first draw.
        let is_contact = matches!(
            kind,
            ChannelKind::Force | ChannelKind::Microphone | ChannelKind::Accelerometer
        );
        let quality = if is_contact {
            libm::exp(cfg.channel_gain_jitter * normal(rng))
        } else {
            1.0
        };
        let noise_std = match kind {
            ChannelKind::Force => profile.force_noise_std,
            ChannelKind::Microphone => profile.mic_noise_std,
            ChannelKind::Accelerometer => profile.accel_noise_std,
            _ => cfg.thermal_noise_std,
        };

        let peak = self.config.peak_force(profile, velocity) * quality;
        let rise_tau = cfg.rise_time_scale / drive;
        let mic_amp = cfg.mic_scale * drive * quality;
        let spike_amp = cfg.accel_spike_scale * drive * quality;
        let spike_width = cfg.accel_spike_width_scale / profile.stiffness;
        let ring_amp = cfg.accel_ring_scale * drive * quality;
        let heat_eq =
            cfg.heater_temp - profile.thermal_effusivity * (cfg.heater_temp - profile.surface_temp);
        let heat_rate = cfg.heat_rate_scale * profile.thermal_effusivity;

        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / rate;
            let dt = t - contact_time;
            let ideal = if dt < 0.0 {
                match kind {
                    ChannelKind::Force | ChannelKind::Microphone | ChannelKind::Accelerometer => {
                        0.0
                    }
                    ChannelKind::HeatTransfer => cfg.heater_temp,
                    ChannelKind::FastThermistor | ChannelKind::AmbientTemp => cfg.ambient_temp,
                }
            } else {
                match kind {
                    ChannelKind::Force => peak * (1.0 - libm::exp(-dt / rise_tau)),
                    ChannelKind::Microphone => {
                        mic_amp
                            * libm::exp(-profile.damping * dt)
                            * libm::sin(core::f64::consts::TAU * profile.resonance * dt)
                    }
                    ChannelKind::Accelerometer => {
                        let spike = if dt < spike_width {
                            spike_amp * libm::sin(core::f64::consts::PI * dt / spike_width)
                        } else {
                            0.0
                        };
                        let ring = ring_amp
                            * libm::exp(-profile.damping * dt)
                            * libm::sin(core::f64::consts::TAU * profile.resonance * dt);
                        spike + ring
                    }
                    ChannelKind::HeatTransfer => {
                        heat_eq + (cfg.heater_temp - heat_eq) * libm::exp(-heat_rate * dt)
                    }
                    ChannelKind::FastThermistor => {
                        profile.surface_temp
                            + (cfg.ambient_temp - profile.surface_temp)
                                * libm::exp(-cfg.therm_rate * dt)
                    }
                    ChannelKind::AmbientTemp => cfg.ambient_temp,
                }
            };
            let value = ideal + noise_std * normal(rng);
            samples.push(if cfg.adc_bits == 0 {
                value
            } else {
                let full_scale = ((1u64 << cfg.adc_bits) - 1) as f64;
                libm::round(self.config.transfer(kind).apply(value)).clamp(0.0, full_scale)
            });
        }
        samples
    }

    /// Expands a protocol into one independent plan per trial: velocities and
    /// per-trial seeds come from the session stream of `protocol.seed`,
    /// foreground first, trial order within each object preserved.
    pub fn plan_pair_session(
        &self,
        foreground: &ObjectProfile,
        background: &ObjectProfile,
        protocol: &SessionProtocol,
    ) -> Result<Vec<TrialPlan>, SimError> {
        foreground.validate()?;
        background.validate()?;
        protocol.validate()?;
        if foreground.name == background.name {
            return Err(SimError::InvalidProtocol(format!(
                "foreground and background share the label {:?}",
                foreground.name
            )));
        }
        if protocol.trial_duration.is_nan() || protocol.trial_duration < MIN_TRIAL_DURATION {
            return Err(SimError::DurationTooShort {
                got: protocol.trial_duration,
            });
        }

        let mut session = channel_rng(protocol.seed, SESSION_STREAM);
        let (lo, hi) = protocol.velocity_range;
        let mut plans = Vec::with_capacity(2 * protocol.trials_per_object);
        for (profile, role) in [
            (foreground, Role::Foreground),
            (background, Role::Background),
        ] {
            for t in 0..protocol.trials_per_object {
                let velocity = if lo == hi {
                    lo
                } else {
                    session.random_range(lo..hi)
                };
                let seed = session.random::<u64>();
                plans.push(TrialPlan {
                    trial_id: format!("{}_{t:02}", profile.name),
                    profile: profile.clone(),
                    role,
                    velocity,
                    duration: protocol.trial_duration,
                    seed,
                });
            }
        }
        Ok(plans)
    }

    /// Runs one plan, stamping its trial id and role onto the result.
    pub fn run_plan(&self, plan: &TrialPlan) -> Result<SimulatedTrial, SimError> {
        let mut sim =
            self.simulate_trial(&plan.profile, plan.velocity, plan.duration, plan.seed)?;
        sim.trial.trial_id = plan.trial_id.clone();
        sim.trial.role = plan.role;
        Ok(sim)
    }

    /// Generates the full labeled dataset for one recognition pair.
    pub fn simulate_pair_dataset(
        &self,
        foreground: &ObjectProfile,
        background: &ObjectProfile,
        protocol: &SessionProtocol,
    ) -> Result<Dataset, SimError> {
        let plans = self.plan_pair_session(foreground, background, protocol)?;
        let mut dataset = Dataset::new(format!("{}_vs_{}", foreground.name, background.name));
        for plan in &plans {
            dataset.trials.push(self.run_plan(plan)?.trial);
        }
        Ok(dataset)
    }
}

fn channel_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal(rng: &mut ChaCha12Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// The seven built-in object profiles. The two tank-pair members differ only
/// modestly (deliberate overlap); the counter pair is far apart.
pub fn builtin_profiles() -> BTreeMap<String, ObjectProfile> {
    let profile = |name: &str,
                   stiffness: f64,
                   mobility: f64,
                   damping: f64,
                   resonance: f64,
                   thermal_effusivity: f64,
                   surface_temp: f64| ObjectProfile {
        name: name.to_string(),
        stiffness,
        mobility,
        damping,
        resonance,
        thermal_effusivity,
        surface_temp,
        force_noise_std: 0.01,
        mic_noise_std: 0.002,
        accel_noise_std: 0.005,
    };
    [
        profile("toothbrush", 0.15, 0.85, 3.0, 180.0, 0.25, 24.0),
        profile("counter", 1.00, 0.00, 1.2, 90.0, 0.85, 22.0),
        profile("towel", 0.22, 0.35, 4.0, 45.0, 0.15, 24.0),
        profile("towel_rack", 0.80, 0.05, 1.5, 200.0, 0.75, 22.0),
        // The porcelain trio shares one fixture and one glaze: contact
        // stiffness and ring acoustics are identical, so the pairs built from
        // them can only be told apart by how much the part yields (mobility
        // relieves peak force). That deliberate overlap is what makes the
        // toilet pairs the hard problems of the set.
        profile("toilet_handle", 0.65, 0.55, 1.6, 130.0, 0.55, 23.0),
        profile("toilet_tank", 0.65, 0.02, 1.6, 130.0, 0.65, 22.0),
        profile("toilet_seat", 0.65, 0.52, 1.6, 130.0, 0.75, 22.5),
    ]
    .into_iter()
    .map(|p| (p.name.clone(), p))
    .collect()
}

/// The four recognition pairs, as (pair name, foreground, background).
pub fn builtin_pairs() -> Vec<(String, ObjectProfile, ObjectProfile)> {
    let profiles = builtin_profiles();
    let get = |name: &str| profiles[name].clone();
    [
        ("toothbrush", "counter"),
        ("towel", "towel_rack"),
        ("toilet_handle", "toilet_tank"),
        ("toilet_seat", "toilet_tank"),
    ]
    .into_iter()
    .map(|(fg, bg)| (format!("{fg}_vs_{bg}"), get(fg), get(bg)))
    .collect()
}
