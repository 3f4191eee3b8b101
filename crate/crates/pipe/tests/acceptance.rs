//! Release gate for the toolkit: nine numbered criteria covering feature
//! geometry, calibration quality, PCA and SVM correctness against
//! independent oracles, end-to-end difficulty bands, cross-validation
//! bookkeeping, byte determinism, and contact-detection accuracy.
//!
//! Each test wraps one criterion and prints a single `[PASS]`/`[FAIL]`
//! line with the measured runtime (visible with `--nocapture`); a
//! criterion also fails if it exceeds its runtime budget.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use tactile_core::calib::fit_polynomial;
use tactile_core::dataset::{Role, Unit};
use tactile_core::eval::{cross_validate, dataset_features, CvMode, PipelineConfig};
use tactile_core::linalg::Mat;
use tactile_core::pca::fit_pca;
use tactile_core::preprocess::{
    detect_contact, window_trial, PreprocessError, FEATURE_LEN, FEATURE_MODALITIES,
    POST_WINDOW_SAMPLES, PRE_WINDOW_SAMPLES, WINDOW_SAMPLES,
};
use tactile_core::sim::{
    builtin_pairs, builtin_profiles, default_calibrations, SessionProtocol, Simulator,
};
use tactile_core::svm::{kkt_violation, train_svm};
use tactile_pipe::calib_io::read_fixture_csv;
use tactile_pipe::report_io::write_report;
use tactile_testkit::eigen::{pca_reference, principal_angle_cosines};
use tactile_testkit::polyfit::polyfit_reference;
use tactile_testkit::svm_oracle::{dual_objective, svm_dual_reference};

/// Runs one criterion, prints its pass/fail line, and enforces the budget.
fn gate(name: &str, budget: Option<Duration>, body: impl FnOnce()) {
    let started = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = started.elapsed();
    match outcome {
        Ok(()) => {
            if let Some(limit) = budget {
                if elapsed > limit {
                    println!("[FAIL] {name} — over budget: {elapsed:.2?} > {limit:.2?}");
                    panic!("{name}: runtime {elapsed:?} exceeds the {limit:?} budget");
                }
            }
            println!("[PASS] {name} ({elapsed:.2?})");
        }
        Err(cause) => {
            println!("[FAIL] {name} ({elapsed:.2?})");
            resume_unwind(cause);
        }
    }
}

fn to_mat(rows: &[Vec<f64>]) -> Mat {
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    Mat::from_rows(&refs)
}

fn default_eval_config(seed: u64) -> PipelineConfig {
    PipelineConfig {
        seed,
        calibrations: Some(default_calibrations()),
        ..PipelineConfig::default()
    }
}

#[test]
fn criterion_1_feature_geometry() {
    gate(
        "criterion 1: 6300-value features cut from [t_c - 0.2 s, t_c + 4 s) at 500 Hz",
        Some(Duration::from_secs(1)),
        || {
            assert_eq!(PRE_WINDOW_SAMPLES, 100);
            assert_eq!(POST_WINDOW_SAMPLES, 2000);
            assert_eq!(WINDOW_SAMPLES, 2100);
            assert_eq!(FEATURE_LEN, 6300);

            // Window placement on one trial of every built-in object.
            let sim = Simulator::default();
            let calibrations = default_calibrations();
            for (i, profile) in builtin_profiles().values().enumerate() {
                let s = sim
                    .simulate_trial(profile, 0.5, 5.0, 400 + i as u64)
                    .unwrap();
                let trial = calibrations.apply_trial(&s.trial).unwrap();
                let event = detect_contact(&trial).unwrap();
                let windows = window_trial(&trial, &event).unwrap();

                // The detected instant sits on the 500 Hz grid; the window
                // starts 0.2 s (100 samples) before it and ends 4 s (2000
                // samples) after it, half-open on the right.
                assert!((event.time - event.index_500hz as f64 / 500.0).abs() < 1e-12);
                let start = event.index_500hz - PRE_WINDOW_SAMPLES;
                assert!((start as f64 / 500.0 - (event.time - 0.2)).abs() < 1e-9);
                assert!(
                    ((start + WINDOW_SAMPLES) as f64 / 500.0 - (event.time + 4.0)).abs() < 1e-9
                );
                for kind in FEATURE_MODALITIES {
                    let cut = windows.modality(kind);
                    let full = &trial.channel(kind).unwrap().samples;
                    assert_eq!(cut.len(), WINDOW_SAMPLES, "{}", profile.name);
                    assert_eq!(cut[0], full[start], "{}", profile.name);
                    assert_eq!(
                        cut[WINDOW_SAMPLES - 1],
                        full[start + WINDOW_SAMPLES - 1],
                        "{}",
                        profile.name
                    );
                }
            }

            // Every assembled feature vector over a full pair dataset.
            let (_, fg, bg) = builtin_pairs().remove(0);
            let protocol = SessionProtocol {
                seed: 11,
                ..SessionProtocol::default()
            };
            let dataset = sim.simulate_pair_dataset(&fg, &bg, &protocol).unwrap();
            let features = dataset_features(&dataset, &default_eval_config(11)).unwrap();
            assert_eq!(features.len(), 20);
            for feature in &features {
                assert_eq!(feature.values.len(), FEATURE_LEN, "{}", feature.trial_id);
                assert!(feature.label == 1 || feature.label == -1);
                assert!(feature.values.iter().all(|v| v.is_finite()));
            }
        },
    );
}

#[test]
fn criterion_2_calibration_quality() {
    gate(
        "criterion 2: cubic fits — exact on noiseless data, R² ≥ 0.99 on noisy fixtures, QR ≡ oracle",
        Some(Duration::from_secs(1)),
        || {
            // Noiseless cubic: stored coefficients back to 1e-9, R² = 1.
            let xs: Vec<f64> = (0..=200).map(|i| 20.0 * i as f64).collect();
            let truth = [12.0, 30.0, 10.0, 12.0]; // in u = x / 4000
            let ys: Vec<f64> = xs
                .iter()
                .map(|&x| {
                    let u = x / 4000.0;
                    ((truth[3] * u + truth[2]) * u + truth[1]) * u + truth[0]
                })
                .collect();
            let model = fit_polynomial(&xs, &ys, 3, Unit::Celsius).unwrap();
            assert_eq!(model.x_scale, 4000.0);
            for (i, (got, want)) in model.coefficients.iter().zip(&truth).enumerate() {
                assert!(
                    (got - want).abs() < 1e-9,
                    "coefficient {i}: {got} vs {want}"
                );
            }
            assert!(
                (model.r_squared - 1.0).abs() < 1e-12,
                "noiseless R² = {}",
                model.r_squared
            );

            // Checked-in noisy fixtures: σ = 0.5 °C over a 15–45 °C span for
            // the thermistor, σ = 0.1 N for the force channel; both must fit
            // a cubic with R² ≥ 0.99 without being an exact interpolation.
            let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
            let (txs, tys, _) = read_fixture_csv(&fixtures.join("thermistor_counts_c.csv")).unwrap();
            assert_eq!(txs.len(), 200);
            let (lo, hi) = tys
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
                    (lo.min(y), hi.max(y))
                });
            assert!(lo > 13.0 && hi < 46.0, "thermistor span {lo}..{hi}");
            let therm = fit_polynomial(&txs, &tys, 3, Unit::Celsius).unwrap();
            assert!(
                therm.r_squared >= 0.99 && therm.r_squared < 1.0,
                "thermistor R² = {}",
                therm.r_squared
            );
            let (fxs, fys, _) = read_fixture_csv(&fixtures.join("force_counts_n.csv")).unwrap();
            let force = fit_polynomial(&fxs, &fys, 3, Unit::Newtons).unwrap();
            assert!(
                force.r_squared >= 0.99 && force.r_squared < 1.0,
                "force R² = {}",
                force.r_squared
            );

            // The QR solution must agree with normal equations solved in
            // double-double arithmetic, across degrees and point counts.
            let mut rng = ChaCha12Rng::seed_from_u64(0xCA11B);
            for case in 0..30usize {
                let degree = 1 + case % 3;
                let n = rng.random_range(degree + 4..=160);
                let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..4095.0)).collect();
                let coeffs: Vec<f64> =
                    (0..=degree).map(|_| rng.random_range(-25.0..25.0)).collect();
                let ys: Vec<f64> = xs
                    .iter()
                    .map(|&x| {
                        let u = x / 4095.0;
                        coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
                            + 0.4 * (rng.random::<f64>() - 0.5)
                    })
                    .collect();
                let model = fit_polynomial(&xs, &ys, degree, Unit::Celsius).unwrap();
                let reference = polyfit_reference(&xs, &ys, degree).unwrap();
                let got = model.unscaled_coefficients();
                let scale = reference.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
                for (g, w) in got.iter().zip(&reference) {
                    assert!(
                        (g - w).abs() <= 1e-6 * scale,
                        "case {case} (degree {degree}, n {n}): {got:?} vs {reference:?}"
                    );
                }
            }
        },
    );
}

#[test]
fn criterion_3_pca_matches_direct_eigendecomposition() {
    gate(
        "criterion 3: Gram-trick PCA ≡ direct covariance eigendecomposition on 50 random matrices",
        Some(Duration::from_secs(5)),
        || {
            let mut rng = ChaCha12Rng::seed_from_u64(0x09CA);
            let mut angle_checks = 0usize;
            for case in 0..50usize {
                let n = rng.random_range(2..=30usize);
                let d = rng.random_range(1..=30usize);
                let k = rng.random_range(1..=(n - 1).min(d).max(1));
                // Per-column decaying scales plant a clean spectral ladder,
                // so the subspace comparison below is well conditioned.
                let rows: Vec<Vec<f64>> = (0..n)
                    .map(|_| {
                        (0..d)
                            .map(|j| 0.9f64.powi(j as i32) * rng.random_range(-1.0..1.0))
                            .collect()
                    })
                    .collect();
                let model = fit_pca(&to_mat(&rows), k)
                    .unwrap_or_else(|e| panic!("case {case} (n {n}, d {d}, k {k}): {e:?}"));
                let reference = pca_reference(&rows, k);
                let lead = reference.eigenvalues[0].max(1e-12);

                for (c, (got, want)) in model
                    .explained_variance
                    .iter()
                    .zip(&reference.eigenvalues)
                    .enumerate()
                {
                    assert!(
                        (got - want).abs() <= 1e-8 * lead.max(1.0),
                        "case {case} eigenvalue {c}: {got} vs {want}"
                    );
                }

                // Orthonormality of the returned basis, always.
                let mut residual_sq = 0.0;
                for i in 0..k {
                    for j in 0..k {
                        let dot: f64 = model
                            .components
                            .row(i)
                            .iter()
                            .zip(model.components.row(j))
                            .map(|(a, b)| a * b)
                            .sum();
                        let target = if i == j { 1.0 } else { 0.0 };
                        residual_sq += (dot - target) * (dot - target);
                    }
                }
                assert!(
                    residual_sq.sqrt() < 1e-8,
                    "case {case}: orthonormality residual {}",
                    residual_sq.sqrt()
                );

                // Subspace agreement is only defined when a spectral gap
                // separates the kept span from the discarded one, and only
                // well-conditioned when the kept eigenvalues are not
                // vanishing: the Gram-side basis scales like 1/sqrt(λ), so a
                // collapsed trailing eigenvalue amplifies rounding dust past
                // any fixed angle tolerance in either implementation.
                let full = pca_reference(&rows, (n - 1).min(d));
                let next = if k < full.eigenvalues.len() {
                    full.eigenvalues[k]
                } else if d > k {
                    0.0
                } else {
                    f64::NEG_INFINITY
                };
                let gap_ok = reference.eigenvalues[k - 1] - next > 1e-3 * lead;
                let conditioned = reference.eigenvalues[k - 1] > 1e-4 * lead;
                if gap_ok && conditioned {
                    let impl_rows: Vec<Vec<f64>> =
                        (0..k).map(|r| model.components.row(r).to_vec()).collect();
                    let cosines = principal_angle_cosines(&impl_rows, &reference.components);
                    for (c, cos) in cosines.iter().enumerate() {
                        let angle = cos.min(1.0).acos();
                        assert!(
                            angle <= 1e-6,
                            "case {case} principal angle {c}: {angle:e} rad"
                        );
                    }
                    angle_checks += 1;
                }
            }
            assert!(
                angle_checks >= 30,
                "only {angle_checks}/50 matrices had a usable spectral gap"
            );
        },
    );
}

#[test]
fn criterion_4_fifteen_components_capture_97_percent() {
    gate(
        "criterion 4: 15 components capture ≥ 97% of variance on every default pair dataset",
        Some(Duration::from_secs(10)),
        || {
            let sim = Simulator::default();
            for (pair_name, fg, bg) in builtin_pairs() {
                let dataset = sim
                    .simulate_pair_dataset(&fg, &bg, &SessionProtocol::default())
                    .unwrap();
                let features = dataset_features(&dataset, &default_eval_config(0)).unwrap();
                assert_eq!(features.len(), 20, "{pair_name}");
                let rows: Vec<Vec<f64>> = features.into_iter().map(|f| f.values).collect();
                let model = fit_pca(&to_mat(&rows), 15).unwrap();
                let captured: f64 = model.explained_ratio.iter().sum();
                assert!(
                    captured >= 0.97,
                    "{pair_name}: 15 components capture only {captured:.5}"
                );
            }
        },
    );
}

#[test]
fn criterion_5_svm_kkt_and_oracle_agreement() {
    gate(
        "criterion 5: SVM — KKT < 1e-6, dual within 1e-3 of the grid oracle, (w, b) = (1, 0) on the symmetric pair",
        Some(Duration::from_secs(5)),
        || {
            // Six-point two-class geometry against the exhaustive dual grid.
            let six_rows = vec![
                vec![2.0, 2.0],
                vec![1.5, 1.0],
                vec![2.5, 0.5],
                vec![-1.0, -1.5],
                vec![-2.0, -0.5],
                vec![-0.5, -2.5],
            ];
            let six_y = vec![1, 1, 1, -1, -1, -1];
            let model = train_svm(&to_mat(&six_rows), &six_y, 1.0, 1e-6, 10_000).unwrap();
            assert!(model.converged);
            let trained = dual_objective(&six_rows, &six_y, &model.alphas);
            let reference = svm_dual_reference(&six_rows, &six_y, 1.0);
            let scale = reference.objective.abs().max(1.0);
            assert!(
                (trained - reference.objective).abs() <= 1e-3 * scale,
                "dual objective {trained} vs grid optimum {}",
                reference.objective
            );

            // The symmetric two-point problem has a closed-form solution.
            let sym = train_svm(&to_mat(&[vec![1.0], vec![-1.0]]), &[1, -1], 1.0, 1e-8, 10_000)
                .unwrap();
            assert!(
                (sym.weights[0] - 1.0).abs() <= 1e-6,
                "weight {} vs 1",
                sym.weights[0]
            );
            assert!(sym.bias.abs() <= 1e-6, "bias {} vs 0", sym.bias);

            // KKT residual, recomputed from scratch, on a problem bank.
            let mut problems: Vec<(Vec<Vec<f64>>, Vec<i32>)> = vec![
                (six_rows, six_y),
                (vec![vec![1.0], vec![-1.0]], vec![1, -1]),
                (
                    vec![vec![1.0], vec![0.4], vec![-0.4], vec![-1.0]],
                    vec![1, -1, 1, -1],
                ),
            ];
            let mut rng = ChaCha12Rng::seed_from_u64(0x057A);
            for _ in 0..20 {
                let n = rng.random_range(4..=40usize);
                let d = rng.random_range(1..=8usize);
                let rows: Vec<Vec<f64>> = (0..n)
                    .map(|i| {
                        let offset = if i % 2 == 0 { 0.8 } else { -0.8 };
                        (0..d)
                            .map(|j| {
                                rng.random_range(-2.0..2.0) + if j == 0 { offset } else { 0.0 }
                            })
                            .collect()
                    })
                    .collect();
                let y: Vec<i32> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
                problems.push((rows, y));
            }
            for (p, (rows, y)) in problems.iter().enumerate() {
                for &c in &[0.1, 1.0, 10.0] {
                    let x = to_mat(rows);
                    let m = train_svm(&x, y, c, 1e-6, 200_000).unwrap();
                    assert!(m.converged, "problem {p} at c = {c} did not converge");
                    let residual = kkt_violation(&m, &x, y);
                    assert!(
                        residual < 1e-6,
                        "problem {p} at c = {c}: KKT residual {residual:e}"
                    );
                }
            }
        },
    );
}

#[test]
fn criterion_6_pair_difficulty_bands() {
    gate(
        "criterion 6: counter pair 100% on all 10 seeds, towel ≥ 90%, tank pairs in [60%, 90%], ordered",
        Some(Duration::from_secs(60)),
        || {
            let sim = Simulator::default();
            let mut results: BTreeMap<String, (f64, Vec<f64>)> = BTreeMap::new();
            for (pair_name, fg, bg) in builtin_pairs() {
                let mut accuracies = Vec::with_capacity(10);
                for seed in 0..10u64 {
                    let protocol = SessionProtocol {
                        seed,
                        ..SessionProtocol::default()
                    };
                    let dataset = sim.simulate_pair_dataset(&fg, &bg, &protocol).unwrap();
                    let report = cross_validate(&dataset, &default_eval_config(seed)).unwrap();
                    accuracies.push(report.mean_accuracy);
                }
                let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
                results.insert(pair_name, (mean, accuracies));
            }

            let (counter_mean, counter_all) = &results["toothbrush_vs_counter"];
            assert!(
                counter_all.iter().all(|&a| a == 1.0),
                "toothbrush_vs_counter must be perfect on every seed: {counter_all:?}"
            );
            let (towel_mean, towel_all) = &results["towel_vs_towel_rack"];
            assert!(
                *towel_mean >= 0.90,
                "towel_vs_towel_rack mean {towel_mean} < 0.90: {towel_all:?}"
            );
            let mut tank_means = Vec::new();
            for pair in ["toilet_handle_vs_toilet_tank", "toilet_seat_vs_toilet_tank"] {
                let (mean, all) = &results[pair];
                assert!(
                    (0.60..=0.90).contains(mean),
                    "{pair} mean {mean} outside [0.60, 0.90]: {all:?}"
                );
                tank_means.push(*mean);
            }
            let hardest_first = counter_mean >= towel_mean
                && tank_means.iter().all(|tank| towel_mean >= tank);
            assert!(hardest_first, "difficulty ordering violated: {results:?}");
        },
    );
}

#[test]
fn criterion_7_cv_modes_and_stratification() {
    gate(
        "criterion 7: both CV modes on every pair; folds disjoint, exhaustive, 2 per class",
        None,
        || {
            let sim = Simulator::default();
            let dir = tempfile::tempdir().unwrap();
            for (pair_name, fg, bg) in builtin_pairs() {
                let protocol = SessionProtocol {
                    seed: 3,
                    ..SessionProtocol::default()
                };
                let dataset = sim.simulate_pair_dataset(&fg, &bg, &protocol).unwrap();
                let roles: BTreeMap<&str, Role> = dataset
                    .trials
                    .iter()
                    .map(|t| (t.trial_id.as_str(), t.role))
                    .collect();
                for paper_mode in [false, true] {
                    let config = PipelineConfig {
                        paper_mode,
                        ..default_eval_config(3)
                    };
                    let report = cross_validate(&dataset, &config).unwrap();
                    let want = if paper_mode {
                        CvMode::PaperMode
                    } else {
                        CvMode::LeakFree
                    };
                    assert_eq!(report.cv_mode, want, "{pair_name}");
                    assert!((0.0..=1.0).contains(&report.mean_accuracy));
                    assert_eq!(report.per_fold_accuracy.len(), 5);

                    // Fold bookkeeping: every trial exactly once (a map key
                    // cannot repeat, so presence of all 20 ids proves both
                    // disjointness and exhaustiveness), 2 per class per fold.
                    assert_eq!(report.fold_assignment.len(), dataset.trials.len());
                    let mut per_fold = vec![[0usize; 2]; config.folds];
                    for trial in &dataset.trials {
                        let fold = *report
                            .fold_assignment
                            .get(&trial.trial_id)
                            .unwrap_or_else(|| panic!("{} missing a fold", trial.trial_id));
                        assert!(fold < config.folds);
                        let class = if roles[trial.trial_id.as_str()] == Role::Foreground {
                            0
                        } else {
                            1
                        };
                        per_fold[fold][class] += 1;
                    }
                    for (fold, counts) in per_fold.iter().enumerate() {
                        assert_eq!(
                            counts,
                            &[2, 2],
                            "{pair_name} ({want:?}): fold {fold} not stratified"
                        );
                    }

                    // The serialized report carries the mode label.
                    let path = dir.path().join(format!("report_{pair_name}.json"));
                    write_report(&report, &path).unwrap();
                    let text = fs::read_to_string(&path).unwrap();
                    let label = if paper_mode {
                        "\"cv_mode\": \"paper_mode\""
                    } else {
                        "\"cv_mode\": \"leak_free\""
                    };
                    assert!(text.contains(label), "{pair_name}: report lacks {label}");
                }
            }
        },
    );
}

#[test]
fn criterion_8_cli_byte_determinism() {
    gate(
        "criterion 8: simulate/evaluate/train rerun → byte-identical dataset, report, and model",
        None,
        || {
            let bin = env!("CARGO_BIN_EXE_tactile");
            let dir = tempfile::tempdir().unwrap();
            let run = |args: &[&str]| {
                let out = Command::new(bin)
                    .args(args)
                    .current_dir(dir.path())
                    .env_remove("TACTILE_PIPE_THREADS")
                    .output()
                    .unwrap();
                assert!(
                    out.status.success(),
                    "tactile {args:?} failed: {}",
                    String::from_utf8_lossy(&out.stderr)
                );
            };
            for tag in ["a", "b"] {
                let data = format!("data_{tag}");
                run(&[
                    "simulate",
                    "--pair",
                    "toilet_handle_vs_toilet_tank",
                    "--seed",
                    "9",
                    "--out",
                    &data,
                ]);
                run(&[
                    "evaluate",
                    "--data",
                    &data,
                    "--seed",
                    "9",
                    "--report",
                    &format!("report_{tag}.json"),
                ]);
                run(&[
                    "train",
                    "--data",
                    &data,
                    "--out",
                    &format!("model_{tag}.txt"),
                ]);
            }

            let dataset_files = |tag: &str| -> BTreeMap<String, Vec<u8>> {
                let dir = dir.path().join(format!("data_{tag}"));
                let mut files = BTreeMap::new();
                for entry in fs::read_dir(&dir).unwrap() {
                    let path = entry.unwrap().path();
                    files.insert(
                        path.file_name().unwrap().to_string_lossy().into_owned(),
                        fs::read(&path).unwrap(),
                    );
                }
                files
            };
            let a = dataset_files("a");
            let b = dataset_files("b");
            assert_eq!(
                a.keys().collect::<Vec<_>>(),
                b.keys().collect::<Vec<_>>(),
                "dataset directories list different files"
            );
            assert_eq!(a.len(), 21, "manifest plus 20 trial files");
            for (name, bytes) in &a {
                assert!(
                    bytes == &b[name],
                    "dataset file {name} differs between reruns"
                );
            }
            for (first, second) in [
                ("report_a.json", "report_b.json"),
                ("model_a.txt", "model_b.txt"),
            ] {
                let x = fs::read(dir.path().join(first)).unwrap();
                let y = fs::read(dir.path().join(second)).unwrap();
                assert!(x == y, "{first} and {second} differ");
            }
        },
    );
}

#[test]
fn criterion_9_contact_detector_accuracy() {
    gate(
        "criterion 9: detected contact within ±10 ms in ≥ 99/100 trials, zero no-contact failures",
        None,
        || {
            let sim = Simulator::default();
            let calibrations = default_calibrations();
            let profiles = builtin_profiles();
            let names: Vec<&String> = profiles.keys().collect();
            let mut hits = 0usize;
            let mut no_contact = 0usize;
            for i in 0..100usize {
                let profile = &profiles[names[i % names.len()].as_str()];
                let velocity = 0.2 + 0.6 * i as f64 / 99.0;
                let s = sim
                    .simulate_trial(profile, velocity, 5.0, 1000 + i as u64)
                    .unwrap();
                let trial = calibrations.apply_trial(&s.trial).unwrap();
                match detect_contact(&trial) {
                    Ok(event) => {
                        if (event.time - s.contact_time).abs() <= 0.010 {
                            hits += 1;
                        }
                    }
                    Err(PreprocessError::NoContactDetected) => no_contact += 1,
                    Err(other) => panic!("trial {i} ({}): {other}", profile.name),
                }
            }
            assert_eq!(no_contact, 0, "valid trials reported as contact-free");
            assert!(hits >= 99, "only {hits}/100 detections within ±10 ms");
        },
    );
}
