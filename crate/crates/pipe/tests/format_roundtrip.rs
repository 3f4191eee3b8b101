//! Round-trip and error-path coverage for every on-disk format: dataset
//! directories, calibration JSON, model text files, and report JSON.

use std::fs;
use std::path::Path;

use tactile_core::calib::fit_polynomial;
use tactile_core::dataset::{ChannelKind, Dataset, Unit};
use tactile_core::eval::{cross_validate, predict_trial, train_full, PipelineConfig};
use tactile_core::sim::{builtin_pairs, SessionProtocol, SimConfig, Simulator};
use tactile_pipe::calib_io::{read_calibration, write_calibration, CalibIoError, CalibrationFile};
use tactile_pipe::dataset_io::{read_dataset, write_dataset, DatasetIoError};
use tactile_pipe::model_io::{load_model, parse_model, render_model, save_model, ModelIoError};
use tactile_pipe::report_io::{read_report, write_accuracy_table, write_report, write_trace_csvs};

fn small_dataset(config: SimConfig, trials_per_object: usize, seed: u64) -> Dataset {
    let pairs = builtin_pairs();
    let (_, fg, bg) = &pairs[0];
    let protocol = SessionProtocol {
        trials_per_object,
        seed,
        ..SessionProtocol::default()
    };
    Simulator::new(config)
        .simulate_pair_dataset(fg, bg, &protocol)
        .unwrap()
}

fn assert_datasets_equal(a: &Dataset, b: &Dataset) {
    assert_eq!(a.pair_name, b.pair_name);
    assert_eq!(a.manifest_version, b.manifest_version);
    assert_eq!(a.trials.len(), b.trials.len());
    for (ta, tb) in a.trials.iter().zip(&b.trials) {
        assert_eq!(ta.trial_id, tb.trial_id);
        assert_eq!(ta.object_label, tb.object_label, "{}", ta.trial_id);
        assert_eq!(ta.role, tb.role, "{}", ta.trial_id);
        assert_eq!(
            ta.pre_contact_velocity, tb.pre_contact_velocity,
            "{}",
            ta.trial_id
        );
        assert_eq!(ta.duration, tb.duration, "{}", ta.trial_id);
        assert_eq!(ta.adc_bits, tb.adc_bits, "{}", ta.trial_id);
        assert_eq!(ta.seed, tb.seed, "{}", ta.trial_id);
        for (kind, ca) in &ta.channels {
            let cb = &tb.channels[kind];
            assert_eq!(ca.spec, cb.spec, "{} {}", ta.trial_id, kind.name());
            assert_eq!(
                ca.samples.len(),
                cb.samples.len(),
                "{} {}",
                ta.trial_id,
                kind.name()
            );
            for (i, (sa, sb)) in ca.samples.iter().zip(&cb.samples).enumerate() {
                assert!(
                    sa.to_bits() == sb.to_bits() || sa == sb,
                    "{} {} sample {i}: {sa:?} vs {sb:?}",
                    ta.trial_id,
                    kind.name()
                );
            }
        }
        assert_eq!(ta.channels.len(), tb.channels.len(), "{}", ta.trial_id);
    }
}

#[test]
fn quantized_dataset_round_trips_exactly() {
    let dataset = small_dataset(SimConfig::default(), 2, 7);
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dataset, dir.path()).unwrap();
    let back = read_dataset(dir.path()).unwrap();
    assert_datasets_equal(&dataset, &back);
    let spec = back.trials[0].channels[&ChannelKind::Force].spec;
    assert_eq!(spec.unit, Unit::AdcCounts);
    assert_eq!(back.trials[0].adc_bits, 12);
}

#[test]
fn idealized_dataset_round_trips_exactly() {
    let dataset = small_dataset(SimConfig::idealized(), 2, 11);
    assert_eq!(dataset.trials[0].adc_bits, 0);
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dataset, dir.path()).unwrap();
    let back = read_dataset(dir.path()).unwrap();
    assert_datasets_equal(&dataset, &back);
    let spec = back.trials[0].channels[&ChannelKind::Force].spec;
    assert_eq!(spec.unit, Unit::Newtons);
}

#[test]
fn dataset_writes_are_byte_identical() {
    let dataset = small_dataset(SimConfig::default(), 2, 3);
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    write_dataset(&dataset, d1.path()).unwrap();
    write_dataset(&dataset, d2.path()).unwrap();
    let mut names: Vec<String> = fs::read_dir(d1.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 5, "manifest + 4 trial files");
    for name in names {
        let a = fs::read(d1.path().join(&name)).unwrap();
        let b = fs::read(d2.path().join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical writes");
    }
}

#[test]
fn dataset_read_errors_are_precise() {
    let missing = read_dataset(Path::new("/nonexistent/nowhere"));
    assert!(matches!(
        missing,
        Err(DatasetIoError::MissingManifest { .. })
    ));

    let dataset = small_dataset(SimConfig::default(), 1, 5);
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dataset, dir.path()).unwrap();

    // Unparseable manifest.
    let manifest_path = dir.path().join("manifest.json");
    let good_manifest = fs::read_to_string(&manifest_path).unwrap();
    fs::write(&manifest_path, "{ not json").unwrap();
    assert!(matches!(
        read_dataset(dir.path()),
        Err(DatasetIoError::MalformedManifest(_))
    ));

    // Future manifest version.
    fs::write(
        &manifest_path,
        good_manifest.replace("\"manifest_version\": 1", "\"manifest_version\": 9"),
    )
    .unwrap();
    assert!(matches!(
        read_dataset(dir.path()),
        Err(DatasetIoError::VersionMismatch { got: 9 })
    ));
    fs::write(&manifest_path, &good_manifest).unwrap();

    // A trial file named by the manifest is gone.
    let trial_file = dir.path().join("counter_00.csv");
    let good_trial = fs::read_to_string(&trial_file).unwrap();
    fs::remove_file(&trial_file).unwrap();
    assert!(matches!(
        read_dataset(dir.path()),
        Err(DatasetIoError::MissingTrialFile { .. })
    ));

    // Non-numeric cell: row numbers are 1-based counting the header.
    let mut lines: Vec<&str> = good_trial.lines().collect();
    let broken = format!("{},oops", lines[4].rsplit_once(',').unwrap().0);
    lines[4] = &broken;
    fs::write(&trial_file, lines.join("\n") + "\n").unwrap();
    match read_dataset(dir.path()) {
        Err(DatasetIoError::MalformedTrialFile { file, row, .. }) => {
            assert_eq!(file, "counter_00.csv");
            assert_eq!(row, 5);
        }
        other => panic!("expected MalformedTrialFile, got {other:?}"),
    }
    fs::write(&trial_file, &good_trial).unwrap();

    // A stray CSV the manifest does not mention.
    fs::write(dir.path().join("orphan.csv"), "t_s,channel,value\n").unwrap();
    assert!(matches!(
        read_dataset(dir.path()),
        Err(DatasetIoError::InvariantViolation(_))
    ));
    fs::remove_file(dir.path().join("orphan.csv")).unwrap();

    // Back to clean: reads again.
    read_dataset(dir.path()).unwrap();
}

#[test]
fn calibration_file_round_trips_and_pads_degree() {
    let xs: Vec<f64> = (0..40).map(|i| 100.0 + 25.0 * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| 3.0 + 0.01 * x).collect();
    let model = fit_polynomial(&xs, &ys, 1, Unit::Celsius).unwrap();
    let file = CalibrationFile::from_model(ChannelKind::FastThermistor, &model, "bench.csv");
    assert_eq!(file.coefficients[2], 0.0);
    assert_eq!(file.coefficients[3], 0.0);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("calib_therm.json");
    write_calibration(&file, &path).unwrap();
    let back = read_calibration(&path).unwrap();
    assert_eq!(back.into_model(), model);

    // Byte determinism.
    let bytes = fs::read(&path).unwrap();
    write_calibration(&file, &path).unwrap();
    assert_eq!(bytes, fs::read(&path).unwrap());
}

#[test]
fn calibration_file_rejects_bad_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("calib.json");
    fs::write(&path, "{\"kind\": \"therm\"").unwrap();
    assert!(matches!(
        read_calibration(&path),
        Err(CalibIoError::Malformed(_))
    ));
    fs::write(
        &path,
        r#"{"kind":"therm","degree":7,"coefficients":[1,2,3,4],"x_scale":100.0,"r_squared":1.0,"fitted_on":"x"}"#,
    )
    .unwrap();
    assert!(matches!(
        read_calibration(&path),
        Err(CalibIoError::Malformed(_))
    ));
    fs::write(
        &path,
        r#"{"kind":"therm","degree":3,"coefficients":[1,2,3,4],"x_scale":0.0,"r_squared":1.0,"fitted_on":"x"}"#,
    )
    .unwrap();
    assert!(matches!(
        read_calibration(&path),
        Err(CalibIoError::Malformed(_))
    ));
}

#[test]
fn model_file_round_trips_bit_exactly() {
    let dataset = small_dataset(SimConfig::default(), 3, 21);
    let config = PipelineConfig {
        k_components: 4,
        ..PipelineConfig::default()
    };
    let model = train_full(&dataset, &config).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model_pair.v1.txt");
    save_model(&model, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, model, "every field including all floats must survive");

    for trial in &dataset.trials {
        let a = predict_trial(&model, trial).unwrap();
        let b = predict_trial(&back, trial).unwrap();
        assert_eq!(a, b);
    }

    // Saving the loaded model reproduces the file bytes.
    assert_eq!(render_model(&model), render_model(&back));
}

#[test]
fn model_file_rejects_corruption() {
    let dataset = small_dataset(SimConfig::default(), 2, 2);
    let config = PipelineConfig {
        k_components: 2,
        ..PipelineConfig::default()
    };
    let model = train_full(&dataset, &config).unwrap();
    let text = render_model(&model);

    // Version bumped by hand.
    let bumped = text.replace("model v1", "model v2");
    assert!(matches!(
        parse_model(&bumped),
        Err(ModelIoError::VersionMismatch { .. })
    ));

    // Truncated mid-file.
    let truncated: String = text.lines().take(12).map(|l| format!("{l}\n")).collect();
    match parse_model(&truncated) {
        Err(ModelIoError::Malformed { line, .. }) => assert_eq!(line, 13),
        other => panic!("expected Malformed, got {other:?}"),
    }

    // A float replaced by text.
    let poisoned = text.replace("contact_sigma_multiplier 6", "contact_sigma_multiplier six");
    assert!(matches!(
        parse_model(&poisoned),
        Err(ModelIoError::Malformed { .. })
    ));

    // Trailing garbage.
    let padded = format!("{text}junk line\n");
    assert!(matches!(
        parse_model(&padded),
        Err(ModelIoError::Malformed { .. })
    ));
}

#[test]
fn report_round_trips_and_exports_csvs() {
    let dataset = small_dataset(SimConfig::default(), 3, 9);
    let config = PipelineConfig {
        k_components: 3,
        folds: 3,
        ..PipelineConfig::default()
    };
    let report = cross_validate(&dataset, &config).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    write_report(&report, &path).unwrap();
    let back = read_report(&path).unwrap();
    assert_eq!(back, report);

    // Byte determinism.
    let bytes = fs::read(&path).unwrap();
    write_report(&report, &path).unwrap();
    assert_eq!(bytes, fs::read(&path).unwrap());

    let table = write_accuracy_table(std::slice::from_ref(&report), dir.path()).unwrap();
    let table_text = fs::read_to_string(table).unwrap();
    assert_eq!(table_text.lines().count(), 2, "header + one row per report");
    assert!(table_text.starts_with("pair,cv_mode,folds,trials,mean_accuracy\n"));
    assert!(table_text.contains("toothbrush_vs_counter,leak_free,3,6,"));

    // Trace export: engineering-unit trial, detected contact, 2100 rows each.
    let trial = tactile_core::sim::default_calibrations()
        .apply_trial(&dataset.trials[0])
        .unwrap();
    let event = tactile_core::preprocess::detect_contact(&trial).unwrap();
    let paths = write_trace_csvs(&trial, &event, dir.path()).unwrap();
    assert_eq!(paths.len(), 3);
    for path in paths {
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2101, "header + 2100 samples");
        assert!(text.starts_with("t_rel_s,value\n"));
        let first_row = text.lines().nth(1).unwrap();
        assert!(
            first_row.starts_with("-0.2,"),
            "window starts 0.2 s before contact"
        );
    }
}
