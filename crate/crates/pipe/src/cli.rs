//! The `tactile` command-line tool: simulate datasets, fit calibrations,
//! run cross-validated evaluations, train/apply models, and export
//! plot-ready CSVs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/validation/I-O error,
//! 3 numerical failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tactile_core::calib::{fit_polynomial, CalibError, Calibrations};
use tactile_core::dataset::{ChannelKind, Dataset, RawTrial};
use tactile_core::eval::{
    cross_validate, predict_trial, train_full, EvalError, PipelineConfig, PipelineModel,
};
use tactile_core::preprocess::{detect_contact_with, ContactParams, PreprocessError};
use tactile_core::sim::{
    builtin_pairs, default_calibrations, ObjectProfile, SessionProtocol, SimError, Simulator,
};

use crate::calib_io::{
    kind_for_value_column, read_calibration, read_fixture_csv, write_calibration, CalibIoError,
    CalibrationFile,
};
use crate::dataset_io::{read_dataset, write_dataset, DatasetIoError};
use crate::model_io::{load_model, save_model, ModelIoError};
use crate::report_io::{
    read_report, write_accuracy_table, write_report, write_trace_csvs, ReportIoError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping worker threads; unset or invalid means 1.
pub const THREADS_ENV: &str = "TACTILE_PIPE_THREADS";

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl From<DatasetIoError> for CliError {
    fn from(e: DatasetIoError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<CalibIoError> for CliError {
    fn from(e: CalibIoError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<ModelIoError> for CliError {
    fn from(e: ModelIoError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<ReportIoError> for CliError {
    fn from(e: ReportIoError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<CalibError> for CliError {
    fn from(e: CalibError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<PreprocessError> for CliError {
    fn from(e: PreprocessError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let code = match &e {
            EvalError::KLessThan2 => EXIT_USAGE,
            EvalError::InvalidDataset { .. }
            | EvalError::ClassTooSmall { .. }
            | EvalError::Calibration { .. }
            | EvalError::Preprocess { .. } => EXIT_DATA,
            EvalError::Normalization { .. } | EvalError::Pca { .. } | EvalError::Svm { .. } => {
                EXIT_NUMERICAL
            }
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "tactile",
    version,
    about = "Multimodal tactile-perception pipeline: simulate, calibrate, evaluate, train, predict, report"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic labeled dataset for a recognition pair
    Simulate(SimulateArgs),
    /// Fit a polynomial sensor calibration from a fixture CSV
    Calibrate(CalibrateArgs),
    /// Run stratified k-fold cross-validation and write a report
    Evaluate(EvaluateArgs),
    /// Fit the full pipeline on every trial and save the model
    Train(TrainArgs),
    /// Classify every trial of a dataset with a saved model
    Predict(PredictArgs),
    /// Export plot-ready CSVs from reports (and optionally one trial's traces)
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Built-in recognition pair, e.g. toothbrush_vs_counter
    #[arg(long, conflicts_with = "profiles")]
    pair: Option<String>,
    /// JSON file mapping profile names to object profiles
    #[arg(long, requires = "fg", requires = "bg")]
    profiles: Option<PathBuf>,
    /// Foreground profile name (with --profiles)
    #[arg(long)]
    fg: Option<String>,
    /// Background profile name (with --profiles)
    #[arg(long)]
    bg: Option<String>,
    /// Output dataset directory
    #[arg(long)]
    out: PathBuf,
    /// Master seed for the whole session
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials per object
    #[arg(long, default_value_t = 10)]
    trials: usize,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    /// Fixture CSV of (counts, value) pairs with a header row
    #[arg(long)]
    fixture: PathBuf,
    /// Polynomial degree
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Channel the calibration is for (force|mic|accel|heat|therm|ambient);
    /// inferred from the fixture's value column when omitted
    #[arg(long)]
    kind: Option<String>,
    /// Output calibration file; defaults to calib_<kind>.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Dataset directory (manifest.json + trial CSVs)
    #[arg(long)]
    data: PathBuf,
    /// Principal components to keep
    #[arg(long, default_value_t = 15)]
    components: usize,
    /// Cross-validation folds
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// SVM penalty parameter
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Fit normalization and PCA once on all trials (replicates the
    /// original leaky procedure) instead of per training fold
    #[arg(long, default_value_t = false)]
    paper_mode: bool,
    /// Fold-assignment seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report output path; defaults to report_<pair>.json
    #[arg(long)]
    report: Option<PathBuf>,
    /// Calibration file(s) overriding the built-in ADC inverses
    #[arg(long)]
    calib: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Dataset directory (manifest.json + trial CSVs)
    #[arg(long)]
    data: PathBuf,
    /// Principal components to keep
    #[arg(long, default_value_t = 15)]
    components: usize,
    /// SVM penalty parameter
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Model output path; defaults to model_<pair>.v1.txt
    #[arg(long)]
    out: Option<PathBuf>,
    /// Calibration file(s) overriding the built-in ADC inverses
    #[arg(long)]
    calib: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Saved model file
    #[arg(long)]
    model: PathBuf,
    /// Dataset directory to classify
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Evaluation report JSON file(s); one accuracy-table row each
    #[arg(long, required = true, num_args = 1..)]
    report: Vec<PathBuf>,
    /// Directory the CSVs are written into
    #[arg(long)]
    plot_data: PathBuf,
    /// Dataset directory to pull a signal trace from
    #[arg(long)]
    data: Option<PathBuf>,
    /// Trial id to trace; defaults to the dataset's first trial
    #[arg(long, requires = "data")]
    trial: Option<String>,
}

/// Parses args and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Report(args) => cmd_report(args),
    }
}

/// Prints one line to stdout. Returns `Ok(false)` when the reader closed the
/// pipe (the caller should stop emitting, the command still succeeds) and an
/// error for any other write failure.
fn emit(line: std::fmt::Arguments) -> Result<bool, CliError> {
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    match out.write_fmt(line).and_then(|()| out.write_all(b"\n")) {
        Ok(()) => Ok(true),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(false),
        Err(e) => Err(CliError::data(format!("cannot write to stdout: {e}"))),
    }
}

fn thread_cap() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// Applies `f` to every item, using up to `threads` workers, and returns
/// results in input order regardless of completion order.
fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let workers = threads.min(items.len());
    let chunk = items.len().div_ceil(workers);
    let mut out: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = (0..workers)
            .filter_map(|w| {
                let start = w * chunk;
                if start >= items.len() {
                    return None;
                }
                let end = (start + chunk).min(items.len());
                let slice = &items[start..end];
                Some(scope.spawn(move || (start, slice.iter().map(f).collect::<Vec<R>>())))
            })
            .collect();
        for handle in handles {
            let (start, results) = handle.join().expect("simulation worker panicked");
            for (offset, r) in results.into_iter().enumerate() {
                out[start + offset] = Some(r);
            }
        }
    });
    out.into_iter()
        .map(|r| r.expect("worker skipped an item"))
        .collect()
}

fn load_profiles(path: &Path) -> Result<BTreeMap<String, ObjectProfile>, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let profiles: BTreeMap<String, ObjectProfile> = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::data(format!("malformed profile file {}: {e}", path.display())))?;
    for (key, profile) in &profiles {
        if key != &profile.name {
            return Err(CliError::data(format!(
                "profile key {key:?} does not match its name field {:?}",
                profile.name
            )));
        }
    }
    Ok(profiles)
}

fn resolve_pair(args: &SimulateArgs) -> Result<(ObjectProfile, ObjectProfile), CliError> {
    if let Some(pair) = &args.pair {
        let pairs = builtin_pairs();
        for (name, fg, bg) in &pairs {
            if name == pair {
                return Ok((fg.clone(), bg.clone()));
            }
        }
        let known: Vec<&str> = pairs.iter().map(|(name, _, _)| name.as_str()).collect();
        return Err(CliError::usage(format!(
            "unknown pair {pair:?}; built-in pairs: {}",
            known.join(", ")
        )));
    }
    if let Some(profiles_path) = &args.profiles {
        let profiles = load_profiles(profiles_path)?;
        let pick = |flag: &str, name: &Option<String>| -> Result<ObjectProfile, CliError> {
            let name = name
                .as_ref()
                .ok_or_else(|| CliError::usage(format!("--profiles requires --{flag}")))?;
            profiles.get(name).cloned().ok_or_else(|| {
                let known: Vec<&str> = profiles.keys().map(String::as_str).collect();
                CliError::data(format!(
                    "profile {name:?} not found in {}; available: {}",
                    profiles_path.display(),
                    known.join(", ")
                ))
            })
        };
        return Ok((pick("fg", &args.fg)?, pick("bg", &args.bg)?));
    }
    Err(CliError::usage(
        "one of --pair or --profiles is required (see --help)",
    ))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let (fg, bg) = resolve_pair(&args)?;
    let protocol = SessionProtocol {
        trials_per_object: args.trials,
        seed: args.seed,
        ..SessionProtocol::default()
    };
    let simulator = Simulator::default();
    let plans = simulator.plan_pair_session(&fg, &bg, &protocol)?;
    let results = parallel_map(&plans, thread_cap(), |plan| simulator.run_plan(plan));

    let mut dataset = Dataset::new(format!("{}_vs_{}", fg.name, bg.name));
    for result in results {
        dataset.trials.push(result?.trial);
    }
    write_dataset(&dataset, &args.out)?;
    emit(format_args!(
        "wrote {} trials to {}",
        dataset.trials.len(),
        args.out.display()
    ))?;
    Ok(())
}

fn parse_kind(name: &str) -> Result<ChannelKind, CliError> {
    ChannelKind::from_name(name).ok_or_else(|| {
        let known: Vec<&str> = ChannelKind::ALL.iter().map(|k| k.name()).collect();
        CliError::usage(format!(
            "unknown channel kind {name:?}; expected one of: {}",
            known.join(", ")
        ))
    })
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let (xs, ys, value_column) = read_fixture_csv(&args.fixture)?;
    let kind = match &args.kind {
        Some(name) => parse_kind(name)?,
        None => kind_for_value_column(&value_column).ok_or_else(|| {
            CliError::data(format!(
                "cannot infer the channel kind from value column {value_column:?}; pass --kind"
            ))
        })?,
    };
    let model = fit_polynomial(&xs, &ys, args.degree, kind.engineering_unit())?;
    let fixture_name = args
        .fixture
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| args.fixture.display().to_string());
    let file = CalibrationFile::from_model(kind, &model, fixture_name);
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("calib_{}.json", kind.name())));
    write_calibration(&file, &out)?;
    emit(format_args!("r2={:.6}", model.r_squared))?;
    Ok(())
}

fn load_calib_overrides(paths: &[PathBuf]) -> Result<Option<Calibrations>, CliError> {
    if paths.is_empty() {
        return Ok(None);
    }
    let mut calibrations = default_calibrations();
    for path in paths {
        let file = read_calibration(path)?;
        calibrations.models.insert(file.kind, file.into_model());
    }
    Ok(Some(calibrations))
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let dataset = read_dataset(&args.data)?;
    let config = PipelineConfig {
        k_components: args.components,
        folds: args.folds,
        c: args.c,
        paper_mode: args.paper_mode,
        seed: args.seed,
        calibrations: load_calib_overrides(&args.calib)?,
        ..PipelineConfig::default()
    };
    let report = cross_validate(&dataset, &config)?;
    let out = args
        .report
        .unwrap_or_else(|| PathBuf::from(format!("report_{}.json", dataset.pair_name)));
    write_report(&report, &out)?;
    emit(format_args!(
        "{} accuracy={:.3}",
        report.pair_name, report.mean_accuracy
    ))?;
    Ok(())
}

fn training_accuracy(model: &PipelineModel, dataset: &Dataset) -> Result<f64, CliError> {
    let mut correct = 0usize;
    for trial in &dataset.trials {
        let prediction = predict_trial(model, trial)?;
        if prediction.label == trial.role.label() {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.trials.len().max(1) as f64)
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let dataset = read_dataset(&args.data)?;
    let config = PipelineConfig {
        k_components: args.components,
        c: args.c,
        calibrations: load_calib_overrides(&args.calib)?,
        ..PipelineConfig::default()
    };
    let model = train_full(&dataset, &config)?;
    let accuracy = training_accuracy(&model, &dataset)?;
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("model_{}.v1.txt", dataset.pair_name)));
    save_model(&model, &out)?;
    emit(format_args!(
        "{} training_accuracy={:.3}",
        model.pair_name, accuracy
    ))?;
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let dataset = read_dataset(&args.data)?;
    for trial in &dataset.trials {
        let prediction = predict_trial(&model, trial)?;
        let side = if prediction.label > 0 {
            "foreground"
        } else {
            "background"
        };
        if !emit(format_args!(
            "{} {side} score={:.6}",
            prediction.trial_id, prediction.score
        ))? {
            return Ok(());
        }
    }
    Ok(())
}

/// Finds the trial to trace and returns it calibrated to engineering units.
fn trace_trial(dataset: &Dataset, wanted: Option<&str>) -> Result<RawTrial, CliError> {
    let trial = match wanted {
        Some(id) => dataset
            .trials
            .iter()
            .find(|t| t.trial_id == id)
            .ok_or_else(|| CliError::data(format!("trial {id:?} not found in the dataset")))?,
        None => dataset
            .trials
            .first()
            .ok_or_else(|| CliError::data("dataset has no trials to trace"))?,
    };
    Ok(default_calibrations().apply_trial(trial)?)
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let mut reports = Vec::with_capacity(args.report.len());
    for path in &args.report {
        reports.push(read_report(path)?);
    }
    let table = write_accuracy_table(&reports, &args.plot_data)?;
    emit(format_args!("wrote {}", table.display()))?;

    if let Some(data) = &args.data {
        let dataset = read_dataset(data)?;
        let trial = trace_trial(&dataset, args.trial.as_deref())?;
        let event = detect_contact_with(&trial, &ContactParams::default())?;
        for path in write_trace_csvs(&trial, &event, &args.plot_data)? {
            emit(format_args!("wrote {}", path.display()))?;
        }
    }
    Ok(())
}
