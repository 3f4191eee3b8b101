//! Polynomial least squares by the normal equations, solved in double-double
//! arithmetic. An intentionally different route from the pipeline's
//! Householder QR in working precision: forming Aᵀ A squares the condition
//! number, which the extra precision more than absorbs for the small degrees
//! used here. The result is a reference the QR path must agree with.

use crate::dd::{dot, Dd};

/// Least-squares coefficients (ascending powers of raw `x`) of a
/// `degree`-polynomial fit, or `None` if the normal equations are singular.
pub fn polyfit_reference(xs: &[f64], ys: &[f64], degree: usize) -> Option<Vec<f64>> {
    assert_eq!(xs.len(), ys.len());
    let n = degree + 1;
    assert!(xs.len() >= n, "need at least degree + 1 points");

    // Work on a scaled abscissa to keep powers tame; unscale at the end in
    // double-double so the unscaling itself costs no accuracy.
    let scale = xs.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1.0);
    let us: Vec<f64> = xs.iter().map(|&x| x / scale).collect();

    // Basis columns u^0 .. u^degree, each column exactly representable as a
    // product chain evaluated in f64; the dd accumulation below handles the
    // dot products.
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    columns.push(vec![1.0; us.len()]);
    for j in 1..n {
        let prev = &columns[j - 1];
        columns.push(prev.iter().zip(&us).map(|(&p, &u)| p * u).collect());
    }

    // Normal equations G c = b with G[i][j] = <col_i, col_j>, b[i] = <col_i, y>.
    let mut g = vec![vec![Dd::default(); n]; n];
    let mut b = vec![Dd::default(); n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = dot(&columns[i], &columns[j]);
        }
        b[i] = dot(&columns[i], ys);
    }

    let c = solve_dd(&mut g, &mut b)?;

    // Unscale: coefficient of x^j is c_j / scale^j.
    let mut out = Vec::with_capacity(n);
    let mut denom = Dd::from_f64(1.0);
    let scale_dd = Dd::from_f64(scale);
    for (j, cj) in c.into_iter().enumerate() {
        if j > 0 {
            denom = denom * scale_dd;
        }
        out.push((cj / denom).to_f64());
    }
    Some(out)
}

/// Gaussian elimination with partial pivoting, entirely in double-double.
fn solve_dd(g: &mut [Vec<Dd>], b: &mut [Dd]) -> Option<Vec<Dd>> {
    let n = b.len();
    for k in 0..n {
        let pivot = (k..n).max_by(|&i, &j| {
            g[i][k]
                .abs()
                .to_f64()
                .partial_cmp(&g[j][k].abs().to_f64())
                .unwrap()
        })?;
        if g[pivot][k].abs().to_f64() == 0.0 {
            return None;
        }
        g.swap(k, pivot);
        b.swap(k, pivot);
        for i in k + 1..n {
            let factor = g[i][k] / g[k][k];
            // Rows k and i of the same matrix are read and written together,
            // so this stays an indexed loop.
            #[allow(clippy::needless_range_loop)]
            for j in k..n {
                g[i][j] = g[i][j] - factor * g[k][j];
            }
            b[i] = b[i] - factor * b[k];
        }
    }
    let mut x = vec![Dd::default(); n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in k + 1..n {
            acc = acc - g[k][j] * x[j];
        }
        x[k] = acc / g[k][k];
    }
    Some(x)
}

/// Horner evaluation of ascending coefficients, in working precision.
pub fn polyval(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cubic_is_recovered() {
        let truth = [2.0, -1.5, 0.25, 3.0];
        let xs: Vec<f64> = (0..25).map(|i| i as f64 * 0.37 - 4.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| polyval(&truth, x)).collect();
        let fit = polyfit_reference(&xs, &ys, 3).unwrap();
        for (got, want) in fit.iter().zip(&truth) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn residuals_are_orthogonal_to_the_basis() {
        // Noisy data: the fit is not exact, but least squares demands the
        // residual be orthogonal to every basis column.
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 110.0).collect();
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| 5.0 + 0.01 * x + 1.0e-6 * x * x + if i % 2 == 0 { 0.8 } else { -0.8 })
            .collect();
        let fit = polyfit_reference(&xs, &ys, 2).unwrap();
        let residual: Vec<f64> = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| y - polyval(&fit, x))
            .collect();
        let y_norm = ys.iter().map(|y| y * y).sum::<f64>().sqrt();
        for power in 0..3 {
            let col: Vec<f64> = xs.iter().map(|&x| x.powi(power)).collect();
            let col_norm = col.iter().map(|c| c * c).sum::<f64>().sqrt();
            let inner: f64 = residual.iter().zip(&col).map(|(r, c)| r * c).sum();
            assert!(
                inner.abs() <= 1e-9 * y_norm * col_norm,
                "power {power}: residual projection {inner}"
            );
        }
    }

    #[test]
    fn singular_systems_are_reported() {
        // All abscissas equal: the basis columns are linearly dependent.
        let xs = [2.0; 6];
        let ys = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(polyfit_reference(&xs, &ys, 2), None);
    }
}
