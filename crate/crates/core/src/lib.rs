#![cfg_attr(not(test), no_std)]
//! Core algorithms for a multimodal tactile object-recognition pipeline.
//!
//! A hand-held probe touches a household object and records six channels:
//! taxel force, contact microphone, and accelerometer at 500 Hz, plus
//! heat-transfer, fast-thermistor, and ambient-temperature channels at
//! 100 Hz. The task is binary: tell a target object (foreground) from the
//! clutter next to it (background). This crate holds everything needed to
//! run that experiment on synthetic data, end to end and deterministically:
//!
//! - [`dataset`]: trial/dataset domain types and validation.
//! - [`sim`]: seeded physics-flavored trial generator with built-in object
//!   profiles of graded difficulty.
//! - [`calib`]: polynomial least-squares calibration from ADC counts to
//!   engineering units.
//! - [`preprocess`]: contact detection, fixed 2100-sample windowing,
//!   per-modality normalization, feature assembly.
//! - [`pca`]: principal component analysis via the Gram trick and a cyclic
//!   Jacobi eigensolver.
//! - [`svm`]: soft-margin linear SVM trained by deterministic pairwise dual
//!   coordinate descent.
//! - [`eval`]: stratified k-fold cross-validation and pipeline orchestration.
//!
//! The crate is `no_std + alloc`; float math goes through `libm` so results
//! do not depend on the platform's libm. File formats and the CLI live in
//! the companion `tactile-pipe` crate.

extern crate alloc;

pub mod calib;
pub mod dataset;
pub mod eval;
pub mod linalg;
pub mod pca;
pub mod preprocess;
pub mod sim;
pub mod svm;
