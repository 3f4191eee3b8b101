//! Evaluation report JSON (`report_<pair>.json`) plus the plot-ready CSV
//! exports: a one-row-per-pair accuracy table and per-modality windowed
//! signal traces.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use tactile_core::dataset::{ChannelKind, RawTrial};
use tactile_core::eval::EvaluationReport;
use tactile_core::preprocess::{
    window_trial, ContactEvent, ModalityWindows, PreprocessError, PRE_WINDOW_SAMPLES,
    WINDOW_SAMPLES,
};

#[derive(Debug, thiserror::Error)]
pub enum ReportIoError {
    #[error("report file is malformed: {0}")]
    Malformed(String),
    #[error("trace export failed for trial {trial_id}: {source}")]
    Trace {
        trial_id: String,
        #[source]
        source: PreprocessError,
    },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportIoError + '_ {
    move |source| ReportIoError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_report(report: &EvaluationReport, path: &Path) -> Result<(), ReportIoError> {
    let mut json =
        serde_json::to_vec_pretty(report).map_err(|e| ReportIoError::Malformed(e.to_string()))?;
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

pub fn read_report(path: &Path) -> Result<EvaluationReport, ReportIoError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&bytes).map_err(|e| ReportIoError::Malformed(e.to_string()))
}

/// Writes `accuracy_table.csv` under `dir`: one row per report, in input
/// order. Returns the file path.
pub fn write_accuracy_table(
    reports: &[EvaluationReport],
    dir: &Path,
) -> Result<PathBuf, ReportIoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("accuracy_table.csv");
    let mut out = String::from("pair,cv_mode,folds,trials,mean_accuracy\n");
    for report in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            report.pair_name,
            report.cv_mode.name(),
            report.per_fold_accuracy.len(),
            report.confusion.total(),
            report.mean_accuracy,
        ));
    }
    fs::write(&path, out).map_err(io_err(&path))?;
    Ok(path)
}

/// Writes `trace_force.csv`, `trace_mic.csv`, and `trace_accel.csv` under
/// `dir`: the analysis window of one trial, 2100 rows each, with timestamps
/// relative to the detected contact instant. Returns the file paths.
pub fn write_trace_csvs(
    trial: &RawTrial,
    event: &ContactEvent,
    dir: &Path,
) -> Result<Vec<PathBuf>, ReportIoError> {
    let windows: ModalityWindows =
        window_trial(trial, event).map_err(|source| ReportIoError::Trace {
            trial_id: trial.trial_id.clone(),
            source,
        })?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let mut paths = Vec::with_capacity(3);
    for kind in [
        ChannelKind::Force,
        ChannelKind::Microphone,
        ChannelKind::Accelerometer,
    ] {
        let samples = windows.modality(kind);
        debug_assert_eq!(samples.len(), WINDOW_SAMPLES);
        let rate = kind.sample_rate();
        let path = dir.join(format!("trace_{}.csv", kind.name()));
        let mut out = String::from("t_rel_s,value\n");
        for (i, value) in samples.iter().enumerate() {
            let t = (i as f64 - PRE_WINDOW_SAMPLES as f64) / rate;
            out.push_str(&format!("{t},{value}\n"));
        }
        fs::write(&path, out).map_err(io_err(&path))?;
        paths.push(path);
    }
    Ok(paths)
}
