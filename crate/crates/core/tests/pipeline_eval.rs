//! Whole-pipeline evaluation properties on simulated datasets: fold
//! stratification, fitting-event disjointness from held-out trials, and a
//! label-permutation baseline that must collapse to chance.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeSet;
use tactile_core::dataset::{Dataset, Role};
use tactile_core::eval::{
    cross_validate, cross_validate_observed, stratified_kfold, EvaluationReport, FitObserver,
    PipelineConfig,
};
use tactile_core::sim::{builtin_profiles, SessionProtocol, Simulator};

fn easy_dataset(seed: u64) -> Dataset {
    let profiles = builtin_profiles();
    let protocol = SessionProtocol {
        seed,
        ..SessionProtocol::default()
    };
    Simulator::default()
        .simulate_pair_dataset(&profiles["toothbrush"], &profiles["counter"], &protocol)
        .unwrap()
}

/// Test-trial index sets per fold, reconstructed from the report.
fn test_sets(dataset: &Dataset, report: &EvaluationReport) -> Vec<BTreeSet<usize>> {
    let folds = report.config.folds;
    let mut sets = vec![BTreeSet::new(); folds];
    for (index, trial) in dataset.trials.iter().enumerate() {
        let fold = report.fold_assignment[&trial.trial_id];
        sets[fold].insert(index);
    }
    sets
}

#[derive(Default)]
struct RecordingObserver {
    events: Vec<(&'static str, Option<usize>, BTreeSet<usize>)>,
}

impl FitObserver for RecordingObserver {
    fn normalization_fitted(&mut self, fold: Option<usize>, train_indices: &[usize]) {
        self.events
            .push(("stats", fold, train_indices.iter().copied().collect()));
    }
    fn pca_fitted(&mut self, fold: Option<usize>, train_indices: &[usize]) {
        self.events
            .push(("pca", fold, train_indices.iter().copied().collect()));
    }
    fn svm_fitted(&mut self, fold: usize, train_indices: &[usize]) {
        self.events
            .push(("svm", Some(fold), train_indices.iter().copied().collect()));
    }
}

#[test]
fn no_fit_ever_sees_its_own_held_out_trials_in_leak_free_mode() {
    let dataset = easy_dataset(31);
    let config = PipelineConfig::default();
    let mut observer = RecordingObserver::default();
    let report = cross_validate_observed(&dataset, &config, &mut observer).unwrap();
    let tests = test_sets(&dataset, &report);

    let mut fitted_folds = BTreeSet::new();
    for (what, fold, indices) in &observer.events {
        let fold = fold.expect("leak-free mode has no shared fits");
        fitted_folds.insert((*what, fold));
        assert!(
            indices.is_disjoint(&tests[fold]),
            "{what} fit of fold {fold} saw held-out trials {:?}",
            indices.intersection(&tests[fold]).collect::<Vec<_>>()
        );
        // It must also have seen everything else.
        assert_eq!(indices.len() + tests[fold].len(), dataset.trials.len());
    }
    // All three fits happened in every fold.
    for what in ["stats", "pca", "svm"] {
        for fold in 0..config.folds {
            assert!(
                fitted_folds.contains(&(what, fold)),
                "missing {what}/{fold}"
            );
        }
    }
}

#[test]
fn shared_mode_statistics_see_every_held_out_trial() {
    let dataset = easy_dataset(31);
    let config = PipelineConfig {
        paper_mode: true,
        ..PipelineConfig::default()
    };
    let mut observer = RecordingObserver::default();
    let report = cross_validate_observed(&dataset, &config, &mut observer).unwrap();
    let tests = test_sets(&dataset, &report);

    let shared: Vec<_> = observer
        .events
        .iter()
        .filter(|(_, fold, _)| fold.is_none())
        .collect();
    assert_eq!(shared.len(), 2, "stats and pca fit once each");
    for (what, _, indices) in shared {
        for (fold, test) in tests.iter().enumerate() {
            assert!(
                !indices.is_disjoint(test),
                "{what} shared fit saw nothing of fold {fold}"
            );
        }
    }
    // The classifier itself is still fit per fold, without its test trials.
    for (what, fold, indices) in &observer.events {
        if *what == "svm" {
            assert!(indices.is_disjoint(&tests[fold.unwrap()]));
        }
    }
}

/// Reassigns the (object label, role) pairs among trials with a fixed
/// shuffle, severing any true relationship between signals and labels while
/// keeping the dataset structurally valid.
fn permute_labels(dataset: &Dataset, seed: u64) -> Dataset {
    let mut permuted = dataset.clone();
    let mut pairs: Vec<(String, Role)> = permuted
        .trials
        .iter()
        .map(|t| (t.object_label.clone(), t.role))
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    for (trial, (label, role)) in permuted.trials.iter_mut().zip(pairs) {
        trial.object_label = label;
        trial.role = role;
    }
    permuted
}

#[test]
fn label_permutation_collapses_accuracy_to_chance() {
    let dataset = easy_dataset(0);
    let config = PipelineConfig::default();
    let genuine = cross_validate(&dataset, &config).unwrap();
    assert!(
        genuine.mean_accuracy > 0.9,
        "the unpermuted pair should be easy: {}",
        genuine.mean_accuracy
    );

    let permuted = permute_labels(&dataset, 1234);
    assert_eq!(permuted.validate(), Vec::new());
    let report = cross_validate(&permuted, &config).unwrap();
    assert!(
        (0.25..=0.75).contains(&report.mean_accuracy),
        "permuted labels should score near chance, got {}",
        report.mean_accuracy
    );
}

#[test]
fn fold_assignment_reacts_to_the_seed() {
    let dataset = easy_dataset(5);
    let a = cross_validate(&dataset, &PipelineConfig::default()).unwrap();
    let b = cross_validate(
        &dataset,
        &PipelineConfig {
            seed: 99,
            ..PipelineConfig::default()
        },
    )
    .unwrap();
    assert_ne!(a.fold_assignment, b.fold_assignment);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stratified_folds_are_balanced_within_every_class(
        positives in 5usize..20,
        negatives in 5usize..20,
        k in 2usize..=5,
        seed in 0u64..10_000,
    ) {
        prop_assume!(k <= positives.min(negatives));
        let labels: Vec<i32> = std::iter::repeat_n(1, positives)
            .chain(std::iter::repeat_n(-1, negatives))
            .collect();
        let assignment = stratified_kfold(&labels, k, seed).unwrap();
        prop_assert_eq!(assignment.len(), labels.len());
        prop_assert!(assignment.iter().all(|&f| f < k));
        for class in [1, -1] {
            let total = labels.iter().filter(|&&l| l == class).count();
            for fold in 0..k {
                let got = labels
                    .iter()
                    .zip(&assignment)
                    .filter(|&(&l, &f)| l == class && f == fold)
                    .count();
                let floor = total / k;
                prop_assert!(
                    got == floor || got == floor + 1,
                    "class {} fold {}: {} of {}", class, fold, got, total
                );
                prop_assert!(got >= 1);
            }
        }
        // Same seed, same split.
        prop_assert_eq!(assignment, stratified_kfold(&labels, k, seed).unwrap());
    }
}
