//! Polynomial calibration against an independent reference: the pipeline
//! fits by Householder QR in working precision, the oracle by normal
//! equations in double-double arithmetic. Their fitted polynomials — as
//! functions, coefficient lists, and r² — must agree.

use proptest::prelude::*;
use tactile_core::calib::{fit_polynomial, r_squared};
use tactile_core::dataset::Unit;
use tactile_testkit::polyfit::{polyfit_reference, polyval};

/// Deterministic noise with no randomness dependency: bounded, zero-ish mean.
fn wiggle(i: usize, amplitude: f64) -> f64 {
    amplitude * (7.3 * i as f64 + 0.4).sin()
}

fn thermistor_like_data() -> (Vec<f64>, Vec<f64>) {
    // Counts across most of a 12-bit range; cubic truth plus bounded noise.
    let xs: Vec<f64> = (0..120).map(|i| 60.0 + i as f64 * 33.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let u = x / 4095.0;
            12.0 + 30.0 * u + 10.0 * u * u + 12.0 * u * u * u + wiggle(i, 0.4)
        })
        .collect();
    (xs, ys)
}

#[test]
fn cubic_fit_matches_the_extended_precision_reference() {
    let (xs, ys) = thermistor_like_data();
    let model = fit_polynomial(&xs, &ys, 3, Unit::Celsius).unwrap();
    let reference = polyfit_reference(&xs, &ys, 3).unwrap();

    let y_scale = ys.iter().fold(0.0f64, |m, &y| m.max(y.abs()));
    for i in 0..=200 {
        let x = i as f64 * 20.0;
        let got = model.apply(x).unwrap();
        let want = polyval(&reference, x);
        assert!(
            (got - want).abs() <= 1e-8 * y_scale,
            "prediction at {x}: {got} vs {want}"
        );
    }

    let coeffs = model.unscaled_coefficients();
    let c_scale = reference.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
    for (got, want) in coeffs.iter().zip(&reference) {
        assert!(
            (got - want).abs() <= 1e-6 * c_scale,
            "coefficients {coeffs:?} vs {reference:?}"
        );
    }
}

#[test]
fn every_supported_degree_matches_the_reference() {
    let (xs, ys) = thermistor_like_data();
    for degree in 1..=3 {
        let model = fit_polynomial(&xs, &ys, degree, Unit::Celsius).unwrap();
        let reference = polyfit_reference(&xs, &ys, degree).unwrap();
        let y_scale = ys.iter().fold(0.0f64, |m, &y| m.max(y.abs()));
        for &x in &xs {
            let got = model.apply(x).unwrap();
            let want = polyval(&reference, x);
            assert!(
                (got - want).abs() <= 1e-8 * y_scale,
                "degree {degree} at {x}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn r_squared_agrees_with_the_reference_fit() {
    let (xs, ys) = thermistor_like_data();
    let model = fit_polynomial(&xs, &ys, 3, Unit::Celsius).unwrap();
    let reference = polyfit_reference(&xs, &ys, 3).unwrap();

    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let r = y - polyval(&reference, x);
            r * r
        })
        .sum();
    let want = 1.0 - ss_res / ss_tot;

    assert!((model.r_squared - want).abs() < 1e-9);
    let recomputed = r_squared(&model, &xs, &ys).unwrap();
    assert!((recomputed - want).abs() < 1e-9);
    // Imperfect but strong fit: noise keeps it below 1, shape keeps it high.
    assert!(model.r_squared > 0.99 && model.r_squared < 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Whatever polynomial generated the data, the QR path and the
    /// extended-precision path fit the same function.
    #[test]
    fn fits_agree_for_random_polynomials(
        c0 in -5.0f64..5.0,
        c1 in -5.0f64..5.0,
        c2 in -5.0f64..5.0,
        c3 in -5.0f64..5.0,
        degree in 1usize..=3,
        span in 10.0f64..4000.0,
        n in 8usize..60,
        noise in 0.0f64..0.2,
    ) {
        let truth = [c0, c1 / span, c2 / (span * span), c3 / (span * span * span)];
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * span / n as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| polyval(&truth, x) + wiggle(i, noise))
            .collect();

        let model = fit_polynomial(&xs, &ys, degree, Unit::Celsius).unwrap();
        let reference = polyfit_reference(&xs, &ys, degree).unwrap();
        let y_scale = ys.iter().fold(1.0f64, |m, &y| m.max(y.abs()));
        for &x in &xs {
            let got = model.apply(x).unwrap();
            let want = polyval(&reference, x);
            prop_assert!(
                (got - want).abs() <= 1e-7 * y_scale,
                "at {}: {} vs {}", x, got, want
            );
        }
    }
}
