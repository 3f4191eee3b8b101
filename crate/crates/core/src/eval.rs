//! End-to-end pipeline evaluation: stratified k-fold cross-validation over a
//! labeled pair dataset, plus single-shot training and prediction.
//!
//! Two evaluation modes exist. The default, leak-free mode refits the
//! normalization statistics and the principal-component basis inside every
//! fold on training trials only. The alternative mode fits both once on the
//! full dataset before splitting — matching a common but optimistic protocol
//! — and is kept selectable so the two can be compared. The classifier is
//! always trained per fold. A [`FitObserver`] receives every fitting event
//! with the exact trial indices used, so tests can prove which trials
//! informed which fit.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::calib::{CalibError, Calibrations};
use crate::dataset::{validate_trial, Dataset, RawTrial, Violation};
use crate::linalg::Mat;
use crate::pca::{fit_pca, project, PcaError, PcaModel};
use crate::preprocess::{
    assemble_feature, detect_contact_with, fit_normalization, normalize_windows, window_trial,
    ContactEvent, ContactParams, ModalityWindows, NormalizationMode, NormalizationStats,
    PreprocessError,
};
use crate::sim::default_calibrations;
use crate::svm::{predict as svm_predict, train_svm, SvmError, SvmModel};

/// ChaCha stream used for fold shuffling, disjoint from the simulator's
/// channel/meta/session streams.
const FOLD_STREAM: u64 = 9;

#[derive(Debug, Clone, thiserror::Error)]
pub enum EvalError {
    #[error("dataset failed validation ({} violation(s); first: {})",
        .violations.len(), first_violation(.violations))]
    InvalidDataset { violations: Vec<Violation> },
    #[error("cross-validation requires at least 2 folds")]
    KLessThan2,
    #[error("class {label} has {count} trial(s), fewer than the {folds} folds")]
    ClassTooSmall {
        label: i32,
        count: usize,
        folds: usize,
    },
    #[error("calibration of trial {trial_id:?} failed: {source}")]
    Calibration {
        trial_id: String,
        #[source]
        source: CalibError,
    },
    #[error("preprocessing of trial {trial_id:?} failed: {source}")]
    Preprocess {
        trial_id: String,
        #[source]
        source: PreprocessError,
    },
    #[error("normalization fit failed ({}): {source}", fold_desc(.fold))]
    Normalization {
        fold: Option<usize>,
        #[source]
        source: PreprocessError,
    },
    #[error("principal-component fit failed ({}): {source}", fold_desc(.fold))]
    Pca {
        fold: Option<usize>,
        #[source]
        source: PcaError,
    },
    #[error("classifier training failed ({}): {source}", fold_desc(.fold))]
    Svm {
        fold: Option<usize>,
        #[source]
        source: SvmError,
    },
}

fn first_violation(violations: &[Violation]) -> String {
    use alloc::string::ToString;
    violations
        .first()
        .map(|v| v.to_string())
        .unwrap_or_else(|| "none".to_string())
}

fn fold_desc(fold: &Option<usize>) -> String {
    use alloc::string::ToString;
    match fold {
        Some(f) => alloc::format!("fold {f}"),
        None => "full dataset".to_string(),
    }
}

/// Which trials the shared (per-dataset) fits may see.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CvMode {
    /// Normalization and PCA are refit per fold on training trials only.
    LeakFree,
    /// Normalization and PCA are fit once on the full dataset before
    /// splitting; optimistic, kept for comparison.
    PaperMode,
}

impl CvMode {
    pub fn name(&self) -> &'static str {
        match self {
            CvMode::LeakFree => "leak_free",
            CvMode::PaperMode => "paper_mode",
        }
    }
}

/// Every knob of the evaluation pipeline.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineConfig {
    /// Principal components kept.
    pub k_components: usize,
    pub folds: usize,
    /// Soft-margin penalty.
    pub c: f64,
    /// Classifier stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// Classifier pair-update budget.
    pub max_passes: usize,
    pub normalization_mode: NormalizationMode,
    /// Selects [`CvMode::PaperMode`] when true.
    pub paper_mode: bool,
    /// Seed for the fold shuffle.
    pub seed: u64,
    pub contact: ContactParams,
    /// Count-to-engineering-unit conversions for quantized trials; `None`
    /// uses the default simulator inverses. Unquantized trials pass through.
    pub calibrations: Option<Calibrations>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k_components: 15,
            folds: 5,
            c: 1.0,
            tol: crate::svm::DEFAULT_TOL,
            max_passes: crate::svm::DEFAULT_MAX_PASSES,
            normalization_mode: NormalizationMode::DivideByVariance,
            paper_mode: false,
            seed: 0,
            contact: ContactParams::default(),
            calibrations: None,
        }
    }
}

/// Binary outcome counts; foreground (+1) is the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionMatrix {
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    pub true_negative: usize,
}

impl ConfusionMatrix {
    pub fn record(&mut self, actual: i32, predicted: i32) {
        match (actual > 0, predicted > 0) {
            (true, true) => self.true_positive += 1,
            (false, true) => self.false_positive += 1,
            (true, false) => self.false_negative += 1,
            (false, false) => self.true_negative += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_positive + self.false_positive + self.false_negative + self.true_negative
    }

    pub fn correct(&self) -> usize {
        self.true_positive + self.true_negative
    }
}

/// Per-fold fitting and convergence details.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FoldDiagnostics {
    pub fold: usize,
    pub train_trials: usize,
    pub test_trials: usize,
    /// Covariance eigenvalues kept by the fold's basis (shared basis in
    /// paper mode).
    pub explained_variance: Vec<f64>,
    pub explained_ratio_sum: f64,
    pub svm_iterations: usize,
    pub svm_converged: bool,
    pub svm_final_violation: f64,
}

/// The full outcome of one cross-validated evaluation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvaluationReport {
    pub pair_name: String,
    pub cv_mode: CvMode,
    /// Fraction correct per fold, fold order.
    pub per_fold_accuracy: Vec<f64>,
    /// Total correct over total trials (fold-size weighted).
    pub mean_accuracy: f64,
    pub confusion: ConfusionMatrix,
    /// Held-out fold index of every trial.
    pub fold_assignment: BTreeMap<String, usize>,
    /// The configuration that produced this report.
    pub config: PipelineConfig,
    pub diagnostics: Vec<FoldDiagnostics>,
}

/// Receives every fitting event with the trial indices that informed it.
/// Shared (whole-dataset) fits report `fold = None`.
pub trait FitObserver {
    fn normalization_fitted(&mut self, fold: Option<usize>, train_indices: &[usize]) {
        let _ = (fold, train_indices);
    }
    fn pca_fitted(&mut self, fold: Option<usize>, train_indices: &[usize]) {
        let _ = (fold, train_indices);
    }
    fn svm_fitted(&mut self, fold: usize, train_indices: &[usize]) {
        let _ = (fold, train_indices);
    }
}

/// Observer that ignores every event.
pub struct NoopObserver;

impl FitObserver for NoopObserver {}

/// Assigns each trial index a fold in `0..k`, shuffling within each class so
/// every fold receives `count/k` (±1) members of every class. Deterministic
/// in `seed`; classes are processed in descending label order.
pub fn stratified_kfold(labels: &[i32], k: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    if k < 2 {
        return Err(EvalError::KLessThan2);
    }
    let mut classes: Vec<i32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    classes.reverse();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(FOLD_STREAM);
    let mut assignment = vec![0usize; labels.len()];
    for class in classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(EvalError::ClassTooSmall {
                label: class,
                count: members.len(),
                folds: k,
            });
        }
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            assignment[i] = pos % k;
        }
    }
    Ok(assignment)
}

/// Calibrated, windowed inputs of one dataset, in trial order.
struct Prepared {
    windows: Vec<ModalityWindows>,
    labels: Vec<i32>,
}

fn prepare(dataset: &Dataset, config: &PipelineConfig) -> Result<Prepared, EvalError> {
    let violations = dataset.validate();
    if !violations.is_empty() {
        return Err(EvalError::InvalidDataset { violations });
    }
    if dataset.trials.is_empty() {
        return Err(EvalError::InvalidDataset {
            violations: vec![Violation::new("trials", "dataset has no trials")],
        });
    }
    let calibrations = config
        .calibrations
        .clone()
        .unwrap_or_else(default_calibrations);

    let mut windows = Vec::with_capacity(dataset.trials.len());
    let mut labels = Vec::with_capacity(dataset.trials.len());
    for trial in &dataset.trials {
        windows.push(prepare_trial(trial, &calibrations, &config.contact)?);
        labels.push(trial.role.label());
    }
    Ok(Prepared { windows, labels })
}

fn prepare_trial(
    trial: &RawTrial,
    calibrations: &Calibrations,
    contact: &ContactParams,
) -> Result<ModalityWindows, EvalError> {
    let annotate_calib = |source| EvalError::Calibration {
        trial_id: trial.trial_id.clone(),
        source,
    };
    let annotate_pre = |source| EvalError::Preprocess {
        trial_id: trial.trial_id.clone(),
        source,
    };
    let calibrated = if trial.adc_bits > 0 {
        calibrations.apply_trial(trial).map_err(annotate_calib)?
    } else {
        trial.clone()
    };
    let event = detect_contact_with(&calibrated, contact).map_err(annotate_pre)?;
    window_trial(&calibrated, &event).map_err(annotate_pre)
}

fn feature_rows(
    windows: &[ModalityWindows],
    indices: &[usize],
    stats: &NormalizationStats,
    fold: Option<usize>,
) -> Result<Vec<Vec<f64>>, EvalError> {
    indices
        .iter()
        .map(|&i| {
            normalize_windows(&windows[i], stats)
                .map_err(|source| EvalError::Normalization { fold, source })
        })
        .collect()
}

fn row_matrix(rows: &[Vec<f64>]) -> Mat {
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    Mat::from_rows(&refs)
}

/// Runs stratified k-fold cross-validation with the default (silent)
/// observer.
pub fn cross_validate(
    dataset: &Dataset,
    config: &PipelineConfig,
) -> Result<EvaluationReport, EvalError> {
    cross_validate_observed(dataset, config, &mut NoopObserver)
}

/// Runs stratified k-fold cross-validation, reporting every fitting event to
/// `observer`.
pub fn cross_validate_observed(
    dataset: &Dataset,
    config: &PipelineConfig,
    observer: &mut dyn FitObserver,
) -> Result<EvaluationReport, EvalError> {
    let prepared = prepare(dataset, config)?;
    let folds = stratified_kfold(&prepared.labels, config.folds, config.seed)?;
    let n = prepared.windows.len();
    let all_indices: Vec<usize> = (0..n).collect();

    // Shared fits for the optimistic mode: statistics and basis see every
    // trial, including ones later held out.
    let shared = if config.paper_mode {
        let stats = fit_normalization(&prepared.windows, config.normalization_mode)
            .map_err(|source| EvalError::Normalization { fold: None, source })?;
        observer.normalization_fitted(None, &all_indices);
        let rows = feature_rows(&prepared.windows, &all_indices, &stats, None)?;
        let pca = fit_pca(&row_matrix(&rows), config.k_components)
            .map_err(|source| EvalError::Pca { fold: None, source })?;
        observer.pca_fitted(None, &all_indices);
        let mut scores = Vec::with_capacity(n);
        for row in &rows {
            scores
                .push(project(&pca, row).map_err(|source| EvalError::Pca { fold: None, source })?);
        }
        Some((stats, pca, scores))
    } else {
        None
    };

    let mut per_fold_accuracy = Vec::with_capacity(config.folds);
    let mut confusion = ConfusionMatrix::default();
    let mut diagnostics = Vec::with_capacity(config.folds);

    for fold in 0..config.folds {
        let train_idx: Vec<usize> = (0..n).filter(|&i| folds[i] != fold).collect();
        let test_idx: Vec<usize> = (0..n).filter(|&i| folds[i] == fold).collect();
        let y_train: Vec<i32> = train_idx.iter().map(|&i| prepared.labels[i]).collect();

        let (pca, train_scores, test_scores) = match &shared {
            Some((_, pca, scores)) => (
                pca.clone(),
                train_idx
                    .iter()
                    .map(|&i| scores[i].clone())
                    .collect::<Vec<_>>(),
                test_idx
                    .iter()
                    .map(|&i| scores[i].clone())
                    .collect::<Vec<_>>(),
            ),
            None => {
                let train_windows: Vec<ModalityWindows> = train_idx
                    .iter()
                    .map(|&i| prepared.windows[i].clone())
                    .collect();
                let stats = fit_normalization(&train_windows, config.normalization_mode).map_err(
                    |source| EvalError::Normalization {
                        fold: Some(fold),
                        source,
                    },
                )?;
                observer.normalization_fitted(Some(fold), &train_idx);
                let annotate = |source| EvalError::Pca {
                    fold: Some(fold),
                    source,
                };
                let train_rows = feature_rows(&prepared.windows, &train_idx, &stats, Some(fold))?;
                let pca =
                    fit_pca(&row_matrix(&train_rows), config.k_components).map_err(annotate)?;
                observer.pca_fitted(Some(fold), &train_idx);
                let mut train_scores = Vec::with_capacity(train_rows.len());
                for row in &train_rows {
                    train_scores.push(project(&pca, row).map_err(annotate)?);
                }
                let test_rows = feature_rows(&prepared.windows, &test_idx, &stats, Some(fold))?;
                let mut test_scores = Vec::with_capacity(test_rows.len());
                for row in &test_rows {
                    test_scores.push(project(&pca, row).map_err(annotate)?);
                }
                (pca, train_scores, test_scores)
            }
        };

        let svm = train_svm(
            &row_matrix(&train_scores),
            &y_train,
            config.c,
            config.tol,
            config.max_passes,
        )
        .map_err(|source| EvalError::Svm {
            fold: Some(fold),
            source,
        })?;
        observer.svm_fitted(fold, &train_idx);

        let mut correct = 0usize;
        for (&i, score_vec) in test_idx.iter().zip(&test_scores) {
            let (predicted, _) = svm_predict(&svm, score_vec).map_err(|source| EvalError::Svm {
                fold: Some(fold),
                source,
            })?;
            let actual = prepared.labels[i];
            confusion.record(actual, predicted);
            if predicted == actual {
                correct += 1;
            }
        }
        per_fold_accuracy.push(correct as f64 / test_idx.len() as f64);
        diagnostics.push(FoldDiagnostics {
            fold,
            train_trials: train_idx.len(),
            test_trials: test_idx.len(),
            explained_variance: pca.explained_variance.clone(),
            explained_ratio_sum: pca.explained_ratio.iter().sum(),
            svm_iterations: svm.iterations,
            svm_converged: svm.converged,
            svm_final_violation: svm.final_violation,
        });
    }

    let fold_assignment = dataset
        .trials
        .iter()
        .enumerate()
        .map(|(i, t)| (t.trial_id.clone(), folds[i]))
        .collect();

    Ok(EvaluationReport {
        pair_name: dataset.pair_name.clone(),
        cv_mode: if config.paper_mode {
            CvMode::PaperMode
        } else {
            CvMode::LeakFree
        },
        mean_accuracy: confusion.correct() as f64 / n as f64,
        per_fold_accuracy,
        confusion,
        fold_assignment,
        config: config.clone(),
        diagnostics,
    })
}

/// A complete trained pipeline: everything needed to classify a raw trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineModel {
    pub pair_name: String,
    pub contact: ContactParams,
    /// `None` falls back to the default simulator inverses for quantized
    /// trials, mirroring [`PipelineConfig::calibrations`].
    pub calibrations: Option<Calibrations>,
    pub normalization: NormalizationStats,
    pub pca: PcaModel,
    pub svm: SvmModel,
}

/// The outcome of classifying one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub trial_id: String,
    /// +1 foreground, −1 background.
    pub label: i32,
    /// Signed decision value; distance-like margin from the boundary.
    pub score: f64,
    pub contact: ContactEvent,
}

/// Fits normalization, basis, and classifier on every trial of the dataset.
pub fn train_full(dataset: &Dataset, config: &PipelineConfig) -> Result<PipelineModel, EvalError> {
    let prepared = prepare(dataset, config)?;
    let stats = fit_normalization(&prepared.windows, config.normalization_mode)
        .map_err(|source| EvalError::Normalization { fold: None, source })?;
    let all: Vec<usize> = (0..prepared.windows.len()).collect();
    let rows = feature_rows(&prepared.windows, &all, &stats, None)?;
    let annotate = |source| EvalError::Pca { fold: None, source };
    let pca = fit_pca(&row_matrix(&rows), config.k_components).map_err(annotate)?;
    let mut scores = Vec::with_capacity(rows.len());
    for row in &rows {
        scores.push(project(&pca, row).map_err(annotate)?);
    }
    let svm = train_svm(
        &row_matrix(&scores),
        &prepared.labels,
        config.c,
        config.tol,
        config.max_passes,
    )
    .map_err(|source| EvalError::Svm { fold: None, source })?;
    Ok(PipelineModel {
        pair_name: dataset.pair_name.clone(),
        contact: config.contact,
        calibrations: config.calibrations.clone(),
        normalization: stats.clone(),
        pca,
        svm,
    })
}

/// Classifies one raw trial with a trained pipeline. The trial's own label
/// fields are ignored.
pub fn predict_trial(model: &PipelineModel, trial: &RawTrial) -> Result<Prediction, EvalError> {
    let violations = validate_trial(trial);
    if !violations.is_empty() {
        return Err(EvalError::InvalidDataset { violations });
    }
    let calibrations = model
        .calibrations
        .clone()
        .unwrap_or_else(default_calibrations);
    let annotate_pre = |source| EvalError::Preprocess {
        trial_id: trial.trial_id.clone(),
        source,
    };
    let calibrated = if trial.adc_bits > 0 {
        calibrations
            .apply_trial(trial)
            .map_err(|source| EvalError::Calibration {
                trial_id: trial.trial_id.clone(),
                source,
            })?
    } else {
        trial.clone()
    };
    let event = detect_contact_with(&calibrated, &model.contact).map_err(annotate_pre)?;
    let windows = window_trial(&calibrated, &event).map_err(annotate_pre)?;
    let values = normalize_windows(&windows, &model.normalization).map_err(annotate_pre)?;
    let projected =
        project(&model.pca, &values).map_err(|source| EvalError::Pca { fold: None, source })?;
    let (label, score) = svm_predict(&model.svm, &projected)
        .map_err(|source| EvalError::Svm { fold: None, source })?;
    Ok(Prediction {
        trial_id: trial.trial_id.clone(),
        label,
        score,
        contact: event,
    })
}

/// Labeled feature vectors for every trial of a dataset under shared
/// whole-dataset normalization; convenience for inspection and testing.
pub fn dataset_features(
    dataset: &Dataset,
    config: &PipelineConfig,
) -> Result<Vec<crate::preprocess::FeatureVector>, EvalError> {
    let prepared = prepare(dataset, config)?;
    let stats = fit_normalization(&prepared.windows, config.normalization_mode)
        .map_err(|source| EvalError::Normalization { fold: None, source })?;
    prepared
        .windows
        .iter()
        .zip(&prepared.labels)
        .map(|(w, &label)| {
            assemble_feature(w, &stats, label)
                .map_err(|source| EvalError::Normalization { fold: None, source })
        })
        .collect()
}
