//! Versioned plain-text persistence for trained pipeline models
//! (`model_<pair>.v1.txt`).
//!
//! The format is line-oriented: a version banner, top-level `key value`
//! pairs, then `[STATS]`, `[PCA]`, and `[SVM]` sections whose values are
//! decimal text. Floats are written with Rust's shortest-round-trip
//! formatting, so save → load reproduces every `f64` bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use tactile_core::calib::{CalibrationModel, Calibrations};
use tactile_core::dataset::{ChannelKind, Unit};
use tactile_core::eval::PipelineModel;
use tactile_core::linalg::Mat;
use tactile_core::pca::PcaModel;
use tactile_core::preprocess::{
    ContactParams, ModalityStats, NormalizationMode, NormalizationStats,
};
use tactile_core::svm::SvmModel;

pub const MODEL_VERSION_LINE: &str = "tactile-pipe model v1";

#[derive(Debug, thiserror::Error)]
pub enum ModelIoError {
    #[error("unsupported model file version: {got:?}")]
    VersionMismatch { got: String },
    #[error("model file line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ModelIoError + '_ {
    move |source| ModelIoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn mode_name(mode: NormalizationMode) -> &'static str {
    match mode {
        NormalizationMode::DivideByVariance => "divide_by_variance",
        NormalizationMode::DivideByStd => "divide_by_std",
    }
}

fn mode_from_name(name: &str) -> Option<NormalizationMode> {
    match name {
        "divide_by_variance" => Some(NormalizationMode::DivideByVariance),
        "divide_by_std" => Some(NormalizationMode::DivideByStd),
        _ => None,
    }
}

fn push_floats(out: &mut String, values: &[f64]) {
    for v in values {
        let _ = write!(out, " {v}");
    }
}

/// Renders the model to its on-disk text. Infallible; exposed so callers can
/// hash or diff models without touching the filesystem.
pub fn render_model(model: &PipelineModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MODEL_VERSION_LINE}");
    let _ = writeln!(s, "pair_name {}", model.pair_name);
    let _ = writeln!(
        s,
        "contact_baseline_samples {}",
        model.contact.baseline_samples
    );
    let _ = writeln!(
        s,
        "contact_sigma_multiplier {}",
        model.contact.sigma_multiplier
    );
    let _ = writeln!(s, "contact_min_threshold {}", model.contact.min_threshold);
    match &model.calibrations {
        None => {
            let _ = writeln!(s, "calibration none");
        }
        Some(calibrations) => {
            let _ = writeln!(s, "calibration embedded {}", calibrations.models.len());
            for (kind, m) in &calibrations.models {
                let mut line = format!(
                    "calib {} {} {} {}",
                    kind.name(),
                    m.degree,
                    m.x_scale,
                    m.r_squared
                );
                push_floats(&mut line, &m.coefficients);
                let _ = writeln!(s, "{line}");
            }
        }
    }

    let _ = writeln!(s, "[STATS]");
    let _ = writeln!(s, "mode {}", mode_name(model.normalization.mode));
    for kind in [
        ChannelKind::Force,
        ChannelKind::Microphone,
        ChannelKind::Accelerometer,
    ] {
        let stats = model.normalization.modality(kind);
        let _ = writeln!(s, "{}_mean {}", kind.name(), stats.mean);
        let _ = writeln!(s, "{}_variance {}", kind.name(), stats.variance);
    }

    let _ = writeln!(s, "[PCA]");
    let _ = writeln!(s, "k {}", model.pca.k);
    let _ = writeln!(s, "dim {}", model.pca.dim());
    let _ = writeln!(s, "total_variance {}", model.pca.total_variance);
    let mut line = String::from("explained_variance");
    push_floats(&mut line, &model.pca.explained_variance);
    let _ = writeln!(s, "{line}");
    let mut line = String::from("explained_ratio");
    push_floats(&mut line, &model.pca.explained_ratio);
    let _ = writeln!(s, "{line}");
    let mut line = String::from("mean");
    push_floats(&mut line, &model.pca.mean);
    let _ = writeln!(s, "{line}");
    for i in 0..model.pca.components.rows() {
        let mut line = format!("component {i}");
        push_floats(&mut line, model.pca.components.row(i));
        let _ = writeln!(s, "{line}");
    }

    let _ = writeln!(s, "[SVM]");
    let _ = writeln!(s, "c {}", model.svm.c);
    let _ = writeln!(s, "bias {}", model.svm.bias);
    let _ = writeln!(s, "iterations {}", model.svm.iterations);
    let _ = writeln!(s, "final_violation {}", model.svm.final_violation);
    let _ = writeln!(s, "converged {}", model.svm.converged);
    let mut line = String::from("weights");
    push_floats(&mut line, &model.svm.weights);
    let _ = writeln!(s, "{line}");
    let mut line = String::from("alphas");
    push_floats(&mut line, &model.svm.alphas);
    let _ = writeln!(s, "{line}");
    s
}

pub fn save_model(model: &PipelineModel, path: &Path) -> Result<(), ModelIoError> {
    let text = render_model(model);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))?;
    Ok(())
}

/// Line cursor: hands out `(line_number, content)` pairs and reports
/// positioned errors.
struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
            last_line: 0,
        }
    }

    fn err(&self, reason: impl Into<String>) -> ModelIoError {
        ModelIoError::Malformed {
            line: self.last_line,
            reason: reason.into(),
        }
    }

    fn next_line(&mut self) -> Result<&'a str, ModelIoError> {
        match self.iter.next() {
            Some((index, line)) => {
                self.last_line = index + 1;
                Ok(line)
            }
            None => {
                self.last_line += 1;
                Err(self.err("unexpected end of file"))
            }
        }
    }

    /// Next line must start with `key` followed by a space (or be exactly
    /// `key`); returns the remainder after the space.
    fn expect_key(&mut self, key: &str) -> Result<&'a str, ModelIoError> {
        let line = self.next_line()?;
        if line == key {
            return Ok("");
        }
        match line.strip_prefix(key) {
            Some(rest) if rest.starts_with(' ') => Ok(&rest[1..]),
            _ => Err(self.err(format!("expected {key:?}, found {line:?}"))),
        }
    }

    fn expect_exact(&mut self, expected: &str) -> Result<(), ModelIoError> {
        let line = self.next_line()?;
        if line == expected {
            Ok(())
        } else {
            Err(self.err(format!("expected {expected:?}, found {line:?}")))
        }
    }

    fn parse_f64(&self, text: &str) -> Result<f64, ModelIoError> {
        text.trim()
            .parse()
            .map_err(|_| self.err(format!("non-numeric value {text:?}")))
    }

    fn parse_usize(&self, text: &str) -> Result<usize, ModelIoError> {
        text.trim()
            .parse()
            .map_err(|_| self.err(format!("non-integer value {text:?}")))
    }

    fn parse_floats(&self, text: &str) -> Result<Vec<f64>, ModelIoError> {
        text.split_whitespace().map(|t| self.parse_f64(t)).collect()
    }

    fn parse_floats_expecting(
        &self,
        text: &str,
        len: usize,
        what: &str,
    ) -> Result<Vec<f64>, ModelIoError> {
        let values = self.parse_floats(text)?;
        if values.len() != len {
            return Err(self.err(format!(
                "{what} holds {} values, expected {len}",
                values.len()
            )));
        }
        Ok(values)
    }

    fn key_f64(&mut self, key: &str) -> Result<f64, ModelIoError> {
        let text = self.expect_key(key)?;
        self.parse_f64(text)
    }

    fn key_usize(&mut self, key: &str) -> Result<usize, ModelIoError> {
        let text = self.expect_key(key)?;
        self.parse_usize(text)
    }

    fn key_floats(&mut self, key: &str, len: usize) -> Result<Vec<f64>, ModelIoError> {
        let text = self.expect_key(key)?;
        self.parse_floats_expecting(text, len, key)
    }
}

pub fn load_model(path: &Path) -> Result<PipelineModel, ModelIoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_model(&text)
}

pub fn parse_model(text: &str) -> Result<PipelineModel, ModelIoError> {
    let mut lines = Lines::new(text);

    let banner = lines.next_line()?;
    if banner != MODEL_VERSION_LINE {
        return Err(ModelIoError::VersionMismatch {
            got: banner.to_string(),
        });
    }

    let pair_name = lines.expect_key("pair_name")?.to_string();
    if pair_name.is_empty() {
        return Err(lines.err("pair_name must not be empty"));
    }
    let baseline_samples = lines.key_usize("contact_baseline_samples")?;
    let sigma_multiplier = lines.key_f64("contact_sigma_multiplier")?;
    let min_threshold = lines.key_f64("contact_min_threshold")?;
    let contact = ContactParams {
        baseline_samples,
        sigma_multiplier,
        min_threshold,
    };

    let calib_desc = lines.expect_key("calibration")?;
    let calibrations = if calib_desc == "none" {
        None
    } else if let Some(count_text) = calib_desc.strip_prefix("embedded ") {
        let count = lines.parse_usize(count_text)?;
        let mut models = std::collections::BTreeMap::new();
        for _ in 0..count {
            let rest = lines.expect_key("calib")?;
            let mut fields = rest.split_whitespace();
            let kind_name = fields
                .next()
                .ok_or_else(|| lines.err("calib line missing channel name"))?;
            let kind = ChannelKind::from_name(kind_name)
                .ok_or_else(|| lines.err(format!("unknown channel {kind_name:?}")))?;
            let degree = lines.parse_usize(
                fields
                    .next()
                    .ok_or_else(|| lines.err("calib line missing degree"))?,
            )?;
            let x_scale = lines.parse_f64(
                fields
                    .next()
                    .ok_or_else(|| lines.err("calib line missing x_scale"))?,
            )?;
            let r_squared = lines.parse_f64(
                fields
                    .next()
                    .ok_or_else(|| lines.err("calib line missing r_squared"))?,
            )?;
            let coefficients: Vec<f64> = fields
                .map(|t| lines.parse_f64(t))
                .collect::<Result<_, _>>()?;
            if coefficients.len() != degree + 1 {
                return Err(lines.err(format!(
                    "calib {kind_name} holds {} coefficients, expected {}",
                    coefficients.len(),
                    degree + 1
                )));
            }
            let model = CalibrationModel {
                coefficients,
                degree,
                r_squared,
                input_unit: Unit::AdcCounts,
                output_unit: kind.engineering_unit(),
                x_scale,
            };
            if models.insert(kind, model).is_some() {
                return Err(lines.err(format!("duplicate calib entry for {kind_name}")));
            }
        }
        Some(Calibrations { models })
    } else {
        return Err(lines.err(format!(
            "calibration must be \"none\" or \"embedded <count>\", found {calib_desc:?}"
        )));
    };

    lines.expect_exact("[STATS]")?;
    let mode = {
        let name = lines.expect_key("mode")?;
        mode_from_name(name)
            .ok_or_else(|| lines.err(format!("unknown normalization mode {name:?}")))?
    };
    let mut modality = |kind: ChannelKind| -> Result<ModalityStats, ModelIoError> {
        let mean = lines.key_f64(&format!("{}_mean", kind.name()))?;
        let variance = lines.key_f64(&format!("{}_variance", kind.name()))?;
        Ok(ModalityStats { mean, variance })
    };
    let force = modality(ChannelKind::Force)?;
    let mic = modality(ChannelKind::Microphone)?;
    let accel = modality(ChannelKind::Accelerometer)?;
    let normalization = NormalizationStats {
        mode,
        force,
        mic,
        accel,
    };

    lines.expect_exact("[PCA]")?;
    let k = lines.key_usize("k")?;
    let dim = lines.key_usize("dim")?;
    if k == 0 || dim == 0 {
        return Err(lines.err("k and dim must be positive"));
    }
    let total_variance = lines.key_f64("total_variance")?;
    let explained_variance = lines.key_floats("explained_variance", k)?;
    let explained_ratio = lines.key_floats("explained_ratio", k)?;
    let mean = lines.key_floats("mean", dim)?;
    let mut component_rows: Vec<Vec<f64>> = Vec::with_capacity(k);
    for i in 0..k {
        let rest = lines.expect_key("component")?;
        let (index_text, values_text) = rest.split_once(' ').unwrap_or((rest, ""));
        let index = lines.parse_usize(index_text)?;
        if index != i {
            return Err(lines.err(format!("component index {index}, expected {i}")));
        }
        component_rows.push(lines.parse_floats_expecting(values_text, dim, "component")?);
    }
    let row_refs: Vec<&[f64]> = component_rows.iter().map(|r| r.as_slice()).collect();
    let pca = PcaModel {
        mean,
        components: Mat::from_rows(&row_refs),
        explained_variance,
        explained_ratio,
        k,
        total_variance,
    };

    lines.expect_exact("[SVM]")?;
    let c = lines.key_f64("c")?;
    let bias = lines.key_f64("bias")?;
    let iterations = lines.key_usize("iterations")?;
    let final_violation = lines.key_f64("final_violation")?;
    let converged = match lines.expect_key("converged")? {
        "true" => true,
        "false" => false,
        other => return Err(lines.err(format!("converged must be true/false, found {other:?}"))),
    };
    let weights = lines.key_floats("weights", k)?;
    let alphas_text = lines.expect_key("alphas")?;
    let alphas = lines.parse_floats(alphas_text)?;
    if alphas.is_empty() {
        return Err(lines.err("alphas must not be empty"));
    }
    let svm = SvmModel {
        weights,
        bias,
        c,
        alphas,
        iterations,
        final_violation,
        converged,
    };

    while let Ok(line) = lines.next_line() {
        if !line.trim().is_empty() {
            return Err(lines.err(format!("unexpected trailing content {line:?}")));
        }
    }

    Ok(PipelineModel {
        pair_name,
        contact,
        calibrations,
        normalization,
        pca,
        svm,
    })
}
