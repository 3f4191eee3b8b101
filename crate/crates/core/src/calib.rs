//! Polynomial least-squares calibration from raw ADC counts to engineering
//! units, with R² diagnostics.
//!
//! Counts are scaled by `x_scale` (the largest absolute input) before the
//! Vandermonde matrix is formed, and the system is solved by Householder QR:
//! 12-bit counts cubed reach ~6.9e10 and would destroy the conditioning of
//! raw normal equations.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::dataset::{ChannelKind, RawTrial, Unit};
use crate::linalg::{solve_least_squares, Mat};

/// Polynomial degree used for device calibration curves.
pub const DEFAULT_DEGREE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CalibError {
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("inputs do not determine a unique polynomial (all xs equal or rank-deficient)")]
    DegenerateInputs,
    #[error("non-finite value in calibration input")]
    NonFiniteInput,
    #[error("xs length {xs} does not match ys length {ys}")]
    MismatchedLengths { xs: usize, ys: usize },
    #[error("no calibration for channel {}", .0.name())]
    MissingCalibration(ChannelKind),
}

/// A fitted polynomial map from ADC counts to one engineering unit.
///
/// `coefficients[j]` multiplies `(raw / x_scale)^j`, so the stored values are
/// well-scaled regardless of the count range they were fitted on.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationModel {
    /// Ascending-degree coefficients in the scaled variable u = raw / x_scale;
    /// length is `degree + 1`.
    pub coefficients: Vec<f64>,
    pub degree: usize,
    /// Coefficient of determination on the fitting data.
    pub r_squared: f64,
    pub input_unit: Unit,
    pub output_unit: Unit,
    /// Conditioning scale applied to inputs before fitting; max |x| of the
    /// fitting data (1 if all inputs were zero).
    pub x_scale: f64,
}

impl CalibrationModel {
    /// Exact inverse of an affine count transfer `counts = offset + gain * v`,
    /// expressed as a cubic with zero high-order terms so it shares the
    /// on-disk shape of fitted device calibrations.
    pub fn linear_inverse(output_unit: Unit, gain: f64, offset: f64, x_scale: f64) -> Self {
        let mut coefficients = alloc::vec![0.0; DEFAULT_DEGREE + 1];
        coefficients[0] = -offset / gain;
        coefficients[1] = x_scale / gain;
        CalibrationModel {
            coefficients,
            degree: DEFAULT_DEGREE,
            r_squared: 1.0,
            input_unit: Unit::AdcCounts,
            output_unit,
            x_scale,
        }
    }

    /// Evaluates the polynomial at one raw reading.
    pub fn apply(&self, raw: f64) -> Result<f64, CalibError> {
        if !raw.is_finite() {
            return Err(CalibError::NonFiniteInput);
        }
        Ok(self.eval_scaled(raw / self.x_scale))
    }

    /// Applies the model to every sample of a channel; equals per-sample
    /// application elementwise.
    pub fn apply_channel(&self, samples: &[f64]) -> Result<Vec<f64>, CalibError> {
        samples.iter().map(|&v| self.apply(v)).collect()
    }

    /// Coefficients of the equivalent polynomial in the raw (unscaled)
    /// variable: `b_j = c_j / x_scale^j`.
    pub fn unscaled_coefficients(&self) -> Vec<f64> {
        let mut scale = 1.0;
        self.coefficients
            .iter()
            .map(|&c| {
                let b = c / scale;
                scale *= self.x_scale;
                b
            })
            .collect()
    }

    fn eval_scaled(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coefficients.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }
}

/// Fits a least-squares polynomial of the given degree mapping `xs` (counts)
/// to `ys` (values in `output_unit`).
///
/// Inputs are scaled by `x_scale = max |x|` and the scaled Vandermonde system
/// is solved by QR. The returned `r_squared` is computed on the fitting data;
/// it is defined as 1 when the targets are constant and perfectly fitted.
pub fn fit_polynomial(
    xs: &[f64],
    ys: &[f64],
    degree: usize,
    output_unit: Unit,
) -> Result<CalibrationModel, CalibError> {
    if xs.len() != ys.len() {
        return Err(CalibError::MismatchedLengths {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(CalibError::NonFiniteInput);
    }
    let needed = degree + 1;
    if xs.len() < needed {
        return Err(CalibError::InsufficientPoints {
            needed,
            got: xs.len(),
        });
    }
    if xs.iter().all(|&x| x == xs[0]) {
        return Err(CalibError::DegenerateInputs);
    }

    let mut x_scale = xs.iter().fold(0.0f64, |m, &x| m.max(libm::fabs(x)));
    if x_scale == 0.0 {
        x_scale = 1.0;
    }
    let mut a = Mat::zeros(xs.len(), needed);
    for (i, &x) in xs.iter().enumerate() {
        let u = x / x_scale;
        let mut p = 1.0;
        for j in 0..needed {
            a[(i, j)] = p;
            p *= u;
        }
    }
    let coefficients = solve_least_squares(&a, ys).ok_or(CalibError::DegenerateInputs)?;

    let mut model = CalibrationModel {
        coefficients,
        degree,
        r_squared: 1.0,
        input_unit: Unit::AdcCounts,
        output_unit,
        x_scale,
    };
    model.r_squared = r_squared(&model, xs, ys)?;
    Ok(model)
}

/// Coefficient of determination 1 − SS_res/SS_tot of `model` on `(xs, ys)`.
///
/// Negative values are possible on data the model was not fitted to. When the
/// targets are constant (SS_tot = 0) the value is 1 for a perfect fit and
/// −infinity otherwise.
pub fn r_squared(model: &CalibrationModel, xs: &[f64], ys: &[f64]) -> Result<f64, CalibError> {
    if xs.len() != ys.len() {
        return Err(CalibError::MismatchedLengths {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(CalibError::InsufficientPoints {
            needed: 2,
            got: xs.len(),
        });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(CalibError::NonFiniteInput);
    }
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - model.eval_scaled(x / model.x_scale);
        ss_res += r * r;
        let d = y - mean;
        ss_tot += d * d;
    }
    if ss_tot == 0.0 {
        return Ok(if ss_res == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        });
    }
    Ok(1.0 - ss_res / ss_tot)
}

/// One calibration model per channel kind; converts quantized trials to
/// engineering units ahead of contact detection and feature extraction.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Calibrations {
    pub models: BTreeMap<ChannelKind, CalibrationModel>,
}

impl Calibrations {
    /// Converts every AdcCounts channel of a quantized trial to engineering
    /// units and clears `adc_bits`. Trials already in engineering units
    /// (`adc_bits == 0`) are returned unchanged.
    pub fn apply_trial(&self, trial: &RawTrial) -> Result<RawTrial, CalibError> {
        let mut out = trial.clone();
        if trial.adc_bits == 0 {
            return Ok(out);
        }
        for (kind, channel) in &mut out.channels {
            if channel.spec.unit != Unit::AdcCounts {
                continue;
            }
            let model = self
                .models
                .get(kind)
                .ok_or(CalibError::MissingCalibration(*kind))?;
            channel.samples = model.apply_channel(&channel.samples)?;
            channel.spec.unit = model.output_unit;
        }
        out.adc_bits = 0;
        Ok(out)
    }
}
