//! Reference oracles used only by tests.
//!
//! Everything here recomputes a quantity the pipeline produces, by a
//! deliberately different route: polynomial least squares via
//! extended-precision normal equations instead of QR, covariance
//! eigendecomposition via a direct dense symmetric solver instead of the
//! Gram trick, and the soft-margin dual via grid search instead of pairwise
//! coordinate ascent. Agreement between the two routes is the evidence the
//! tests rely on; nothing in this crate is reachable from shipped code.

pub mod dd;
pub mod eigen;
pub mod polyfit;
pub mod svm_oracle;
