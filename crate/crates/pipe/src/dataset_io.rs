//! Directory layout for datasets: one `manifest.json` plus one CSV per
//! trial. Samples are stored as decimal text with full round-trip precision,
//! so write → read reproduces every bit; rows are sorted by (channel, t_s)
//! and the manifest enumerates exactly the trial files present.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tactile_core::dataset::{
    Channel, ChannelKind, ChannelSpec, Dataset, RawTrial, Role, MANIFEST_VERSION,
};

#[derive(Debug, thiserror::Error)]
pub enum DatasetIoError {
    #[error("no manifest.json in {dir}")]
    MissingManifest { dir: String },
    #[error("manifest is malformed: {0}")]
    MalformedManifest(String),
    #[error("unsupported manifest_version {got} (this reader handles {MANIFEST_VERSION})")]
    VersionMismatch { got: u32 },
    #[error("trial file {file} referenced by the manifest is missing")]
    MissingTrialFile { file: String },
    #[error("trial file {file}, row {row}: {reason}")]
    MalformedTrialFile {
        file: String,
        row: usize,
        reason: String,
    },
    #[error("dataset invariant violated: {0}")]
    InvariantViolation(String),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetIoError + '_ {
    move |source| DatasetIoError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// `manifest.json` contents.
#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    manifest_version: u32,
    pair_name: String,
    trials: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    trial_id: String,
    file: String,
    object_label: String,
    role: Role,
    velocity_mps: f64,
    seed: Option<u64>,
    adc_bits: u32,
}

const TRIAL_HEADER: [&str; 3] = ["t_s", "channel", "value"];

/// Writes `manifest.json` plus one `<trial_id>.csv` per trial into `dir`
/// (created if needed). The dataset must already satisfy its invariants.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<(), DatasetIoError> {
    let violations = dataset.validate();
    if !violations.is_empty() {
        return Err(DatasetIoError::InvariantViolation(format!(
            "{} violation(s); first: {}",
            violations.len(),
            violations[0]
        )));
    }
    for trial in &dataset.trials {
        if trial.trial_id.contains(['/', '\\']) || trial.trial_id.starts_with('.') {
            return Err(DatasetIoError::InvariantViolation(format!(
                "trial id {:?} is not a safe file stem",
                trial.trial_id
            )));
        }
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let manifest = Manifest {
        manifest_version: dataset.manifest_version,
        pair_name: dataset.pair_name.clone(),
        trials: dataset
            .trials
            .iter()
            .map(|t| ManifestEntry {
                trial_id: t.trial_id.clone(),
                file: format!("{}.csv", t.trial_id),
                object_label: t.object_label.clone(),
                role: t.role,
                velocity_mps: t.pre_contact_velocity,
                seed: t.seed,
                adc_bits: t.adc_bits,
            })
            .collect(),
    };
    let manifest_path = dir.join("manifest.json");
    let mut json = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| DatasetIoError::MalformedManifest(e.to_string()))?;
    json.push(b'\n');
    let mut f = fs::File::create(&manifest_path).map_err(io_err(&manifest_path))?;
    f.write_all(&json).map_err(io_err(&manifest_path))?;

    for trial in &dataset.trials {
        let path = dir.join(format!("{}.csv", trial.trial_id));
        write_trial_csv(trial, &path)?;
    }
    Ok(())
}

fn write_trial_csv(trial: &RawTrial, path: &Path) -> Result<(), DatasetIoError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut writer = csv::Writer::from_writer(std::io::BufWriter::new(file));
    writer
        .write_record(TRIAL_HEADER)
        .map_err(|e| csv_io(path, e))?;

    // (channel, t_s) sort order == iterate channel names lexicographically.
    let mut by_name: BTreeMap<&str, &Channel> = BTreeMap::new();
    for channel in trial.channels.values() {
        by_name.insert(channel.spec.kind.name(), channel);
    }
    for (name, channel) in by_name {
        let rate = channel.spec.sample_rate;
        for (i, value) in channel.samples.iter().enumerate() {
            let t = i as f64 / rate;
            writer
                .write_record([format!("{t}"), name.to_string(), format!("{value}")])
                .map_err(|e| csv_io(path, e))?;
        }
    }
    writer.flush().map_err(io_err(path))?;
    Ok(())
}

fn csv_io(path: &Path, e: csv::Error) -> DatasetIoError {
    DatasetIoError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    }
}

/// Reads a dataset directory written by [`write_dataset`], enforcing version,
/// per-trial shape, and whole-dataset invariants, and rejecting orphan CSVs.
pub fn read_dataset(dir: &Path) -> Result<Dataset, DatasetIoError> {
    let manifest_path = dir.join("manifest.json");
    let bytes = match fs::read(&manifest_path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(DatasetIoError::MissingManifest {
                dir: dir.display().to_string(),
            })
        }
        Err(e) => return Err(io_err(&manifest_path)(e)),
    };
    let manifest: Manifest = serde_json::from_slice(&bytes)
        .map_err(|e| DatasetIoError::MalformedManifest(e.to_string()))?;
    if manifest.manifest_version != MANIFEST_VERSION {
        return Err(DatasetIoError::VersionMismatch {
            got: manifest.manifest_version,
        });
    }

    // No orphans: every CSV in the directory must be claimed by the manifest.
    let claimed: std::collections::BTreeSet<&str> =
        manifest.trials.iter().map(|t| t.file.as_str()).collect();
    let listing = fs::read_dir(dir).map_err(io_err(dir))?;
    for entry in listing {
        let entry = entry.map_err(io_err(dir))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".csv") && !claimed.contains(name.as_str()) {
            return Err(DatasetIoError::InvariantViolation(format!(
                "orphan trial file {name} not referenced by the manifest"
            )));
        }
    }

    let mut trials = Vec::with_capacity(manifest.trials.len());
    for entry in &manifest.trials {
        trials.push(read_trial_csv(dir, entry)?);
    }
    let dataset = Dataset {
        pair_name: manifest.pair_name,
        manifest_version: manifest.manifest_version,
        trials,
    };
    let violations = dataset.validate();
    if !violations.is_empty() {
        return Err(DatasetIoError::InvariantViolation(format!(
            "{} violation(s); first: {}",
            violations.len(),
            violations[0]
        )));
    }
    Ok(dataset)
}

fn read_trial_csv(dir: &Path, entry: &ManifestEntry) -> Result<RawTrial, DatasetIoError> {
    let path: PathBuf = dir.join(&entry.file);
    let file = match fs::File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(DatasetIoError::MissingTrialFile {
                file: entry.file.clone(),
            })
        }
        Err(e) => return Err(io_err(&path)(e)),
    };
    let malformed = |row: usize, reason: String| DatasetIoError::MalformedTrialFile {
        file: entry.file.clone(),
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
    if headers.iter().ne(TRIAL_HEADER) {
        return Err(malformed(
            1,
            format!("header must be t_s,channel,value, got {headers:?}"),
        ));
    }

    let mut samples: BTreeMap<ChannelKind, Vec<f64>> = BTreeMap::new();
    let mut previous: Option<(ChannelKind, f64)> = None;
    for (index, record) in reader.records().enumerate() {
        let row = index + 2; // 1-based, after the header row
        let record = record.map_err(|e| malformed(row, e.to_string()))?;
        if record.len() != 3 {
            return Err(malformed(
                row,
                format!("expected 3 fields, got {}", record.len()),
            ));
        }
        let t: f64 = record[0]
            .parse()
            .map_err(|_| malformed(row, format!("non-numeric t_s {:?}", &record[0])))?;
        let kind = ChannelKind::from_name(&record[1])
            .ok_or_else(|| malformed(row, format!("unknown channel {:?}", &record[1])))?;
        let value: f64 = record[2]
            .parse()
            .map_err(|_| malformed(row, format!("non-numeric value {:?}", &record[2])))?;

        // Rows must arrive sorted by (channel, t_s); each channel's
        // timestamps must sit exactly on its sampling grid.
        if let Some((prev_kind, prev_t)) = previous {
            let in_order = (kind.name() > prev_kind.name()) || (kind == prev_kind && t > prev_t);
            if !in_order {
                return Err(malformed(row, "rows not sorted by (channel, t_s)".into()));
            }
        }
        previous = Some((kind, t));

        let channel_samples = samples.entry(kind).or_default();
        let expected_t = channel_samples.len() as f64 / kind.sample_rate();
        if (t - expected_t).abs() > 1e-9 {
            return Err(malformed(
                row,
                format!(
                    "t_s {t} off the {} Hz grid (expected {expected_t})",
                    kind.sample_rate()
                ),
            ));
        }
        channel_samples.push(value);
    }

    let duration = samples
        .iter()
        .map(|(kind, s)| s.len() as f64 / kind.sample_rate())
        .fold(0.0f64, f64::max);

    let channels = samples
        .into_iter()
        .map(|(kind, samples)| {
            let spec = if entry.adc_bits > 0 {
                ChannelSpec::quantized(kind)
            } else {
                ChannelSpec::engineering(kind)
            };
            (kind, Channel { spec, samples })
        })
        .collect();

    Ok(RawTrial {
        trial_id: entry.trial_id.clone(),
        object_label: entry.object_label.clone(),
        role: entry.role,
        channels,
        pre_contact_velocity: entry.velocity_mps,
        duration,
        adc_bits: entry.adc_bits,
        seed: entry.seed,
    })
}
