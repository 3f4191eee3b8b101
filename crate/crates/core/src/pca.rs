//! Principal component analysis for the N ≪ D regime.
//!
//! The sample covariance of an N × D matrix with N ≈ 20 and D = 6300 is never
//! formed. Instead the N × N Gram matrix of the centered data is
//! eigendecomposed (cyclic Jacobi, see [`crate::linalg`]) and its
//! eigenvectors are mapped back to D-space:
//! if `(1/(N−1)) X_c X_cᵀ u = λ u` then `v = X_cᵀ u / √((N−1) λ)` is a unit
//! eigenvector of the covariance with the same eigenvalue.

use alloc::vec::Vec;

use crate::linalg::{jacobi_eigh, LinalgError, Mat};

/// Relative eigenvalue cutoff below which directions count as numerically
/// rank-deficient.
pub const RANK_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PcaError {
    #[error("k = {k} exceeds min(N − 1, D) = {max}")]
    KTooLarge { k: usize, max: usize },
    #[error("data has numerical rank {rank}, fewer than the requested components")]
    DegenerateData { rank: usize },
    #[error("non-finite value in input matrix")]
    NonFiniteInput,
    #[error("vector has length {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Eigen(#[from] LinalgError),
}

/// A fitted PCA basis: mean vector, k orthonormal components (rows), and the
/// variance ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// k × D; row i is the i-th principal direction.
    pub components: Mat,
    /// Covariance eigenvalues for the kept components, nonincreasing.
    pub explained_variance: Vec<f64>,
    /// `explained_variance / total_variance`.
    pub explained_ratio: Vec<f64>,
    pub k: usize,
    /// Trace of the sample covariance (sum of all its eigenvalues).
    pub total_variance: f64,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Fits a k-component PCA of the rows of `x` (N trials × D features) using
/// the divide-by-(N−1) covariance convention.
///
/// Component signs follow a fixed convention — the largest-magnitude entry of
/// each component is positive (ties broken toward the lowest index) — so that
/// repeated fits are byte-identical.
pub fn fit_pca(x: &Mat, k: usize) -> Result<PcaModel, PcaError> {
    let n = x.rows();
    let d = x.cols();
    if x.data().iter().any(|v| !v.is_finite()) {
        return Err(PcaError::NonFiniteInput);
    }
    let max_k = if n >= 2 { (n - 1).min(d) } else { 0 };
    if k < 1 || k > max_k {
        return Err(PcaError::KTooLarge { k, max: max_k });
    }

    let mut mean = alloc::vec![0.0; d];
    for i in 0..n {
        for (j, m) in mean.iter_mut().enumerate() {
            *m += x[(i, j)];
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut centered = Mat::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            centered[(i, j)] = x[(i, j)] - mean[j];
        }
    }

    let denom = (n - 1) as f64;
    let mut gram = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut dot = 0.0;
            for t in 0..d {
                dot += centered[(i, t)] * centered[(j, t)];
            }
            let g = dot / denom;
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }
    let total_variance = (0..n).map(|i| gram[(i, i)]).sum::<f64>();

    let eigen = jacobi_eigh(&gram)?;
    let mut order: Vec<usize> = (0..n).collect();
    // Descending by eigenvalue; equal values keep their original Jacobi
    // ordering so the result is deterministic.
    order.sort_by(|&a, &b| {
        eigen.values[b]
            .partial_cmp(&eigen.values[a])
            .expect("jacobi eigenvalues are finite")
            .then(a.cmp(&b))
    });

    let lambda_max = eigen.values[order[0]].max(0.0);
    let rank = order
        .iter()
        .filter(|&&i| eigen.values[i] > lambda_max * RANK_REL_TOL && eigen.values[i] > 0.0)
        .count();
    if rank < k {
        return Err(PcaError::DegenerateData { rank });
    }

    let mut components = Mat::zeros(k, d);
    let mut explained_variance = Vec::with_capacity(k);
    for (row, &idx) in order[..k].iter().enumerate() {
        let lambda = eigen.values[idx];
        explained_variance.push(lambda);
        let scale = 1.0 / libm::sqrt(denom * lambda);
        for t in 0..d {
            let mut v = 0.0;
            for i in 0..n {
                v += centered[(i, t)] * eigen.vectors[(i, idx)];
            }
            components[(row, t)] = v * scale;
        }
        // The Gram-trick map is unit-norm only up to roundoff; renormalize.
        let norm = libm::sqrt(
            (0..d)
                .map(|t| components[(row, t)] * components[(row, t)])
                .sum(),
        );
        for t in 0..d {
            components[(row, t)] /= norm;
        }
        // Sign convention: largest-magnitude entry positive, ties → lowest
        // index (strict > keeps the first maximum found).
        let mut arg = 0;
        let mut best = libm::fabs(components[(row, 0)]);
        for t in 1..d {
            let a = libm::fabs(components[(row, t)]);
            if a > best {
                best = a;
                arg = t;
            }
        }
        if components[(row, arg)] < 0.0 {
            for t in 0..d {
                components[(row, t)] = -components[(row, t)];
            }
        }
    }

    let explained_ratio = explained_variance
        .iter()
        .map(|&l| l / total_variance)
        .collect();
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        explained_ratio,
        k,
        total_variance,
    })
}

/// Projects a D-vector onto the component basis: `components · (x − mean)`.
pub fn project(model: &PcaModel, x: &[f64]) -> Result<Vec<f64>, PcaError> {
    let d = model.dim();
    if x.len() != d {
        return Err(PcaError::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let mut z = alloc::vec![0.0; model.k];
    for (i, zi) in z.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (t, (xt, mt)) in x.iter().zip(model.mean.iter()).enumerate() {
            acc += model.components[(i, t)] * (xt - mt);
        }
        *zi = acc;
    }
    Ok(z)
}

/// Maps scores back to data space: `mean + componentsᵀ · z`.
pub fn reconstruct(model: &PcaModel, z: &[f64]) -> Result<Vec<f64>, PcaError> {
    if z.len() != model.k {
        return Err(PcaError::DimensionMismatch {
            expected: model.k,
            got: z.len(),
        });
    }
    let d = model.dim();
    let mut x = model.mean.clone();
    for (i, &zi) in z.iter().enumerate() {
        for (t, xt) in x.iter_mut().enumerate().take(d) {
            *xt += model.components[(i, t)] * zi;
        }
    }
    Ok(x)
}
