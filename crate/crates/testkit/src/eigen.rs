//! Direct covariance eigendecomposition and subspace comparison, built on a
//! dense symmetric solver. The pipeline computes its basis from the N×N Gram
//! matrix of centered rows; this oracle forms the D×D covariance explicitly
//! instead, so the two agree only if the Gram-side mapping back to feature
//! space is right. Intended for modest D (the oracle is O(D³)).

use nalgebra::{DMatrix, DVector};

/// Reference decomposition: eigenvalues descending, components as rows, no
/// sign convention applied.
pub struct ReferencePca {
    pub mean: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// One row per component, orthonormal.
    pub components: Vec<Vec<f64>>,
    /// Trace of the sample covariance.
    pub total_variance: f64,
}

/// Eigendecomposition of the sample covariance (divide by N−1) of `rows`,
/// keeping the top `k` pairs.
pub fn pca_reference(rows: &[Vec<f64>], k: usize) -> ReferencePca {
    let n = rows.len();
    assert!(n >= 2, "need at least two rows");
    let d = rows[0].len();
    assert!(k <= d);

    let mut mean = vec![0.0f64; d];
    for row in rows {
        assert_eq!(row.len(), d);
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    let centered = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
    let covariance = centered.transpose() * &centered / (n as f64 - 1.0);
    let total_variance = covariance.trace();

    let eigen = covariance.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let eigenvalues: Vec<f64> = order
        .iter()
        .take(k)
        .map(|&i| eigen.eigenvalues[i])
        .collect();
    let components: Vec<Vec<f64>> = order
        .iter()
        .take(k)
        .map(|&i| eigen.eigenvectors.column(i).iter().copied().collect())
        .collect();

    ReferencePca {
        mean,
        eigenvalues,
        components,
        total_variance,
    }
}

/// Cosines of the principal angles between the row spans of `a` and `b`
/// (each a set of orthonormal vectors), descending. All ones means the
/// subspaces coincide.
pub fn principal_angle_cosines(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    assert!(!a.is_empty() && !b.is_empty());
    let d = a[0].len();
    assert!(b.iter().all(|r| r.len() == d));
    let ka = a.len();
    let kb = b.len();
    let mut m = DMatrix::zeros(ka, kb);
    for (i, ra) in a.iter().enumerate() {
        for (j, rb) in b.iter().enumerate() {
            m[(i, j)] = DVector::from_column_slice(ra).dot(&DVector::from_column_slice(rb));
        }
    }
    let mut sv: Vec<f64> = m
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    // Rounding can push a cosine infinitesimally above 1.
    sv.into_iter().map(|s| s.min(1.0)).collect()
}
