//! Calibration files (`calib_<kind>.json`) and the fixture CSVs they are
//! fitted from. The JSON stores the conditioned-basis coefficients padded to
//! four entries together with the conditioning scale, so any degree ≤ 3
//! round-trips exactly.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tactile_core::calib::CalibrationModel;
use tactile_core::dataset::{ChannelKind, Unit};

#[derive(Debug, thiserror::Error)]
pub enum CalibIoError {
    #[error("calibration file is malformed: {0}")]
    Malformed(String),
    #[error("fixture {file}, row {row}: {reason}")]
    MalformedFixture {
        file: String,
        row: usize,
        reason: String,
    },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CalibIoError + '_ {
    move |source| CalibIoError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// On-disk calibration: coefficients are in the conditioned basis
/// `u = counts / x_scale`, ascending, zero-padded to degree 3.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub kind: ChannelKind,
    pub degree: usize,
    pub coefficients: [f64; 4],
    pub x_scale: f64,
    pub r_squared: f64,
    /// Name of the fixture the fit came from.
    pub fitted_on: String,
}

impl CalibrationFile {
    pub fn from_model(
        kind: ChannelKind,
        model: &CalibrationModel,
        fitted_on: impl Into<String>,
    ) -> Self {
        let mut coefficients = [0.0; 4];
        for (slot, &c) in coefficients.iter_mut().zip(&model.coefficients) {
            *slot = c;
        }
        CalibrationFile {
            kind,
            degree: model.degree,
            coefficients,
            x_scale: model.x_scale,
            r_squared: model.r_squared,
            fitted_on: fitted_on.into(),
        }
    }

    pub fn into_model(self) -> CalibrationModel {
        CalibrationModel {
            coefficients: self.coefficients[..=self.degree.min(3)].to_vec(),
            degree: self.degree,
            r_squared: self.r_squared,
            input_unit: Unit::AdcCounts,
            output_unit: self.kind.engineering_unit(),
            x_scale: self.x_scale,
        }
    }
}

pub fn write_calibration(file: &CalibrationFile, path: &Path) -> Result<(), CalibIoError> {
    let mut json =
        serde_json::to_vec_pretty(file).map_err(|e| CalibIoError::Malformed(e.to_string()))?;
    json.push(b'\n');
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&json).map_err(io_err(path))?;
    Ok(())
}

pub fn read_calibration(path: &Path) -> Result<CalibrationFile, CalibIoError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let file: CalibrationFile =
        serde_json::from_slice(&bytes).map_err(|e| CalibIoError::Malformed(e.to_string()))?;
    if file.degree > 3 {
        return Err(CalibIoError::Malformed(format!(
            "degree {} exceeds the stored coefficient count",
            file.degree
        )));
    }
    if file.x_scale.is_nan() || file.x_scale <= 0.0 {
        return Err(CalibIoError::Malformed(format!(
            "x_scale must be positive, got {}",
            file.x_scale
        )));
    }
    Ok(file)
}

/// Reads a two-column fixture CSV `(counts, value)` with a one-line header;
/// returns `(counts, values, value_column_name)`.
pub fn read_fixture_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, String), CalibIoError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let malformed = |row: usize, reason: String| CalibIoError::MalformedFixture {
        file: file_name.clone(),
        row,
        reason,
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(std::io::BufReader::new(file));
    let headers = reader
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .clone();
    if headers.len() != 2 {
        return Err(malformed(
            1,
            format!("expected 2 columns, got {}", headers.len()),
        ));
    }
    let value_name = headers[1].to_string();

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let row = index + 2;
        let record = record.map_err(|e| malformed(row, e.to_string()))?;
        if record.len() != 2 {
            return Err(malformed(
                row,
                format!("expected 2 fields, got {}", record.len()),
            ));
        }
        let x: f64 = record[0]
            .parse()
            .map_err(|_| malformed(row, format!("non-numeric counts {:?}", &record[0])))?;
        let y: f64 = record[1]
            .parse()
            .map_err(|_| malformed(row, format!("non-numeric value {:?}", &record[1])))?;
        xs.push(x);
        ys.push(y);
    }
    Ok((xs, ys, value_name))
}

/// Maps a fixture's value-column name to the channel kind it calibrates.
pub fn kind_for_value_column(name: &str) -> Option<ChannelKind> {
    match name.to_ascii_lowercase().as_str() {
        "celsius" | "temp_c" | "c" => Some(ChannelKind::FastThermistor),
        "newtons" | "force_n" | "n" => Some(ChannelKind::Force),
        "volts" | "v" => Some(ChannelKind::Microphone),
        "g" | "accel_g" => Some(ChannelKind::Accelerometer),
        _ => None,
    }
}
