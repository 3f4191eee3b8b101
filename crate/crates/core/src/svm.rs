//! Binary soft-margin linear SVM trained by deterministic pairwise dual
//! coordinate ascent.
//!
//! Each step selects the maximal violating pair of dual variables under the
//! constraint Σ αᵢyᵢ = 0 (one index from the "can increase" set, one from the
//! "can decrease" set, ties broken toward the lowest index) and solves that
//! two-variable subproblem exactly. There is no randomization and no
//! data-dependent reordering, so identical inputs yield bit-identical models;
//! negating every label yields the exactly mirrored model (w′ = −w, b′ = −b).

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Mat;

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_PASSES: usize = 10_000;
/// Curvature floor: pair steps with η below this move straight to the box
/// boundary instead of dividing by a vanishing second derivative.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvmError {
    #[error("training data contains a single class; need both labels")]
    SingleClassInput,
    #[error("non-finite value in training data")]
    NonFiniteInput,
    #[error("vector has length {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label at index {index} is {value}, expected +1 or -1")]
    InvalidLabel { index: usize, value: i32 },
    #[error("{rows} data rows but {labels} labels")]
    SizeMismatch { rows: usize, labels: usize },
    #[error("penalty parameter must be positive, got {0}")]
    InvalidPenalty(f64),
}

/// A trained linear decision function plus its dual variables and training
/// diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// Primal weights in feature (PCA-score) space.
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Penalty parameter the model was trained with.
    pub c: f64,
    /// Dual variables, one per training row, each in [0, c].
    pub alphas: Vec<f64>,
    /// Pair updates performed.
    pub iterations: usize,
    /// Maximal KKT violation when training stopped (0 when fully satisfied).
    pub final_violation: f64,
    /// False when the pass budget ran out before the tolerance was met.
    pub converged: bool,
}

/// Trains on rows of `x` with labels `y` (entries ±1). Stops when the maximal
/// KKT violation drops below `tol` or after `max_passes` pair updates,
/// whichever comes first; the latter case is reported via
/// [`SvmModel::converged`], not as an error.
pub fn train_svm(
    x: &Mat,
    y: &[i32],
    c: f64,
    tol: f64,
    max_passes: usize,
) -> Result<SvmModel, SvmError> {
    train_svm_traced(x, y, c, tol, max_passes, |_| {})
}

/// [`train_svm`] with a callback receiving the dual objective after every
/// pair update, for convergence monitoring.
pub fn train_svm_traced(
    x: &Mat,
    y: &[i32],
    c: f64,
    tol: f64,
    max_passes: usize,
    mut on_step: impl FnMut(f64),
) -> Result<SvmModel, SvmError> {
    let n = x.rows();
    let dim = x.cols();
    if y.len() != n {
        return Err(SvmError::SizeMismatch {
            rows: n,
            labels: y.len(),
        });
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(SvmError::InvalidPenalty(c));
    }
    if x.data().iter().any(|v| !v.is_finite()) {
        return Err(SvmError::NonFiniteInput);
    }
    for (index, &value) in y.iter().enumerate() {
        if value != 1 && value != -1 {
            return Err(SvmError::InvalidLabel { index, value });
        }
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(SvmError::SingleClassInput);
    }

    // Kernel matrix, filled symmetrically so K[i][j] and K[j][i] are the
    // same float.
    let mut kernel = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut dot = 0.0;
            for t in 0..dim {
                dot += x[(i, t)] * x[(j, t)];
            }
            kernel[(i, j)] = dot;
            kernel[(j, i)] = dot;
        }
    }

    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let mut alphas = vec![0.0f64; n];
    let mut weights = vec![0.0f64; dim];
    // Residuals r_i = y_i − w·x_i, maintained incrementally through the
    // kernel matrix.
    let mut residual = yf.clone();

    let mut iterations = 0usize;
    let (mut m_up, mut m_low);
    loop {
        // I_up: alphas that may increase their y·α product; I_low: those that
        // may decrease it. The most violating pair is (argmax, argmin) of the
        // residual over these sets.
        let mut up: Option<usize> = None;
        let mut low: Option<usize> = None;
        for t in 0..n {
            let a = alphas[t];
            let in_up = (y[t] > 0 && a < c) || (y[t] < 0 && a > 0.0);
            let in_low = (y[t] < 0 && a < c) || (y[t] > 0 && a > 0.0);
            if in_up && up.is_none_or(|u| residual[t] > residual[u]) {
                up = Some(t);
            }
            if in_low && low.is_none_or(|l| residual[t] < residual[l]) {
                low = Some(t);
            }
        }
        let (Some(i), Some(j)) = (up, low) else {
            // One side is empty: no feasible ascent direction remains.
            m_up = f64::NEG_INFINITY;
            m_low = f64::INFINITY;
            break;
        };
        m_up = residual[i];
        m_low = residual[j];
        if m_up - m_low <= tol || iterations == max_passes {
            break;
        }

        // Exact solution of the two-variable subproblem along the feasible
        // direction Δαᵢ = yᵢ·d, Δαⱼ = −yⱼ·d.
        let eta = kernel[(i, i)] + kernel[(j, j)] - 2.0 * kernel[(i, j)];
        let room_i = if y[i] > 0 { c - alphas[i] } else { alphas[i] };
        let room_j = if y[j] > 0 { alphas[j] } else { c - alphas[j] };
        let unclipped = if eta > TAU {
            (m_up - m_low) / eta
        } else {
            f64::INFINITY
        };
        let d = unclipped.min(room_i).min(room_j);

        // Land exactly on the box bound when the step is bound-limited, so
        // bound membership tests stay exact.
        alphas[i] = if d == room_i {
            if y[i] > 0 {
                c
            } else {
                0.0
            }
        } else {
            alphas[i] + yf[i] * d
        };
        alphas[j] = if d == room_j {
            if y[j] > 0 {
                0.0
            } else {
                c
            }
        } else {
            alphas[j] - yf[j] * d
        };
        for t in 0..dim {
            weights[t] += d * (x[(i, t)] - x[(j, t)]);
        }
        for t in 0..n {
            residual[t] -= d * (kernel[(t, i)] - kernel[(t, j)]);
        }
        iterations += 1;
        on_step(dual_objective(&alphas, &yf, &kernel));
    }

    // Bias: average residual over free support vectors; with none, the
    // midpoint of the feasible interval defined by the bound ones.
    let free: Vec<usize> = (0..n)
        .filter(|&t| alphas[t] > 0.0 && alphas[t] < c)
        .collect();
    let bias = if free.is_empty() {
        if m_up.is_finite() && m_low.is_finite() {
            (m_up + m_low) / 2.0
        } else {
            0.0
        }
    } else {
        free.iter().map(|&t| residual[t]).sum::<f64>() / free.len() as f64
    };

    Ok(SvmModel {
        weights,
        bias,
        c,
        alphas,
        iterations,
        final_violation: (m_up - m_low).max(0.0),
        converged: m_up - m_low <= tol,
    })
}

/// Dual objective Σαᵢ − ½ ΣΣ αᵢαⱼyᵢyⱼK(i,j), evaluated from the dual
/// variables and the kernel (not the incrementally maintained weights).
fn dual_objective(alphas: &[f64], yf: &[f64], kernel: &Mat) -> f64 {
    let n = alphas.len();
    let mut linear = 0.0;
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        linear += alphas[i];
        for j in 0..n {
            quad += alphas[i] * alphas[j] * yf[i] * yf[j] * kernel[(i, j)];
        }
    }
    linear - 0.5 * quad
}

/// Decision for one point: `score = w·x + b`, label +1 when `score >= 0`
/// (points exactly on the hyperplane go to +1).
pub fn predict(model: &SvmModel, x: &[f64]) -> Result<(i32, f64), SvmError> {
    if x.len() != model.weights.len() {
        return Err(SvmError::DimensionMismatch {
            expected: model.weights.len(),
            got: x.len(),
        });
    }
    let score = model.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + model.bias;
    Ok((if score >= 0.0 { 1 } else { -1 }, score))
}

/// Maximal KKT violation of `model` on its training set, recomputed from the
/// stored weights and dual variables:
/// α = 0 ⇒ y·score ≥ 1, 0 < α < C ⇒ y·score = 1, α = C ⇒ y·score ≤ 1.
pub fn kkt_violation(model: &SvmModel, x: &Mat, y: &[i32]) -> f64 {
    let mut worst = 0.0f64;
    for (i, &yi) in y.iter().enumerate() {
        let (_, score) = predict(model, x.row(i)).expect("training rows match model dimension");
        let margin = yi as f64 * score;
        let a = model.alphas[i];
        let violation = if a <= 0.0 {
            (1.0 - margin).max(0.0)
        } else if a >= model.c {
            (margin - 1.0).max(0.0)
        } else {
            libm::fabs(margin - 1.0)
        };
        worst = worst.max(violation);
    }
    worst
}
