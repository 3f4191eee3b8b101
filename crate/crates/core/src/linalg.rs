//! Minimal dense linear algebra owned by this crate: a row-major matrix,
//! Householder-QR least squares, and a cyclic Jacobi eigensolver for
//! symmetric matrices.
//!
//! The systems involved are tiny (degree-3 Vandermonde columns, N x N Gram
//! matrices with N = number of trials), so clarity and determinism win over
//! speed. Both solvers are branch-deterministic: identical inputs produce
//! bit-identical outputs.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// Upper bound on Jacobi sweeps. Cyclic Jacobi converges quadratically once
/// the off-diagonal mass is small; symmetric matrices of the sizes used here
/// finish in well under 20 sweeps, so hitting this limit indicates a bug or
/// non-finite input rather than a hard matrix.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Termination threshold: off-diagonal Frobenius mass relative to the
/// Frobenius norm of the input matrix.
pub const JACOBI_REL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error(
        "Jacobi eigensolver did not reach off-diagonal mass {target:e} within {sweeps} sweeps (residual {off_diagonal:e})"
    )]
    JacobiSweepLimit {
        sweeps: usize,
        off_diagonal: f64,
        target: f64,
    },
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row slices. All rows must share a length.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Mat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            debug_assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Flat row-major view of all entries.
    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Frobenius norm over all entries.
    pub fn frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    /// Frobenius norm of the strictly off-diagonal part (square matrices).
    pub fn off_diagonal_frobenius(&self) -> f64 {
        debug_assert_eq!(self.rows, self.cols);
        let mut sum = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r != c {
                    let v = self[(r, c)];
                    sum += v * v;
                }
            }
        }
        libm::sqrt(sum)
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Least-squares solution of `A x = b` (`A` is m x n with m >= n) via
/// Householder QR. Returns `None` when `A` is numerically rank deficient.
pub fn solve_least_squares(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let m = a.rows();
    let n = a.cols();
    debug_assert!(m >= n && b.len() == m);

    let mut r = a.clone();
    let mut qtb = b.to_vec();
    for k in 0..n {
        let mut col_norm_sq = 0.0;
        for i in k..m {
            col_norm_sq += r[(i, k)] * r[(i, k)];
        }
        let col_norm = libm::sqrt(col_norm_sq);
        if col_norm == 0.0 {
            return None;
        }
        // Reflect so column k becomes alpha * e_k; the sign choice avoids
        // cancellation in v_k = x_k - alpha.
        let alpha = if r[(k, k)] >= 0.0 {
            -col_norm
        } else {
            col_norm
        };
        let mut v = vec![0.0; m - k];
        v[0] = r[(k, k)] - alpha;
        for i in k + 1..m {
            v[i - k] = r[(i, k)];
        }
        // v'v = -2 * alpha * v_0, always positive with the sign choice above.
        let vtv = -2.0 * alpha * v[0];
        for j in k..n {
            let mut dot = 0.0;
            for i in k..m {
                dot += v[i - k] * r[(i, j)];
            }
            let f = 2.0 * dot / vtv;
            for i in k..m {
                r[(i, j)] -= f * v[i - k];
            }
        }
        let mut dot = 0.0;
        for i in k..m {
            dot += v[i - k] * qtb[i];
        }
        let f = 2.0 * dot / vtv;
        for i in k..m {
            qtb[i] -= f * v[i - k];
        }
        r[(k, k)] = alpha;
    }

    let max_diag = (0..n).map(|k| libm::fabs(r[(k, k)])).fold(0.0, f64::max);
    if max_diag == 0.0 || !max_diag.is_finite() {
        return None;
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let diag = r[(k, k)];
        if libm::fabs(diag) <= 1e-13 * max_diag {
            return None;
        }
        let mut s = qtb[k];
        for j in k + 1..n {
            s -= r[(k, j)] * x[j];
        }
        x[k] = s / diag;
    }
    Some(x)
}

/// Eigendecomposition of a symmetric matrix produced by [`jacobi_eigh`].
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in the order produced by the rotation sequence (unsorted).
    pub values: Vec<f64>,
    /// Column `j` of `vectors` is the eigenvector for `values[j]`.
    pub vectors: Mat,
    /// Full sweeps executed before the tolerance was met.
    pub sweeps: usize,
    /// Off-diagonal Frobenius mass of the rotated matrix at termination.
    pub off_diagonal: f64,
    /// Frobenius norm of the input, the reference for the relative tolerance.
    pub matrix_norm: f64,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps rotate every (p, q) pair in a fixed row-major order until the
/// off-diagonal Frobenius mass drops below [`JACOBI_REL_TOL`] relative to the
/// input's Frobenius norm, or [`JACOBI_MAX_SWEEPS`] is exhausted. Only the
/// values in `a` are read; the caller guarantees symmetry.
pub fn jacobi_eigh(a: &Mat) -> Result<SymmetricEigen, LinalgError> {
    let n = a.rows();
    debug_assert_eq!(n, a.cols());
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let norm = a.frobenius();

    let mut sweeps = 0;
    let mut off = m.off_diagonal_frobenius();
    while off > JACOBI_REL_TOL * norm {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(LinalgError::JacobiSweepLimit {
                sweeps,
                off_diagonal: off,
                target: JACOBI_REL_TOL * norm,
            });
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                // tan of the rotation angle; the closed form degrades to
                // 1/(2*theta) when theta^2 would overflow.
                let t = if libm::fabs(theta) > 1e150 {
                    1.0 / (2.0 * theta)
                } else if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                let tau = s / (1.0 + c);

                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = m[(r, p)];
                    let arq = m[(r, q)];
                    let new_rp = arp - s * (arq + tau * arp);
                    let new_rq = arq + s * (arp - tau * arq);
                    m[(r, p)] = new_rp;
                    m[(p, r)] = new_rp;
                    m[(r, q)] = new_rq;
                    m[(q, r)] = new_rq;
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp - s * (vrq + tau * vrp);
                    v[(r, q)] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        sweeps += 1;
        off = m.off_diagonal_frobenius();
    }

    let values = (0..n).map(|i| m[(i, i)]).collect();
    Ok(SymmetricEigen {
        values,
        vectors: v,
        sweeps,
        off_diagonal: off,
        matrix_norm: norm,
    })
}
