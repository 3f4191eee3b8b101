//! Brute-force reference for the soft-margin dual: maximize
//! `Σα − ½ ΣΣ α_i α_j y_i y_j ⟨x_i, x_j⟩` over the box `[0, C]^n` subject to
//! `Σ α_i y_i = 0`, by multiresolution grid search. The equality constraint
//! eliminates one variable, so problems of up to six points stay tractable;
//! that is plenty to certify an optimizer on hand-built geometry.

/// The best dual point the grid search found.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub objective: f64,
}

/// Dual objective at `alphas` for rows `x`, labels `y` (±1).
pub fn dual_objective(x: &[Vec<f64>], y: &[i32], alphas: &[f64]) -> f64 {
    let n = x.len();
    assert_eq!(y.len(), n);
    assert_eq!(alphas.len(), n);
    let mut value: f64 = alphas.iter().sum();
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if alphas[j] == 0.0 {
                continue;
            }
            let kernel: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum();
            value -= 0.5 * alphas[i] * alphas[j] * (y[i] * y[j]) as f64 * kernel;
        }
    }
    value
}

/// Multiresolution grid search over the feasible dual box. `alphas[0]` is
/// eliminated through the equality constraint; grids refine around the
/// incumbent until the step drops below `1e-5 * c`. Supports 2..=6 points.
pub fn svm_dual_reference(x: &[Vec<f64>], y: &[i32], c: f64) -> DualSolution {
    let n = x.len();
    assert!((2..=6).contains(&n), "grid search supports 2..=6 points");
    assert_eq!(y.len(), n);
    assert!(y.iter().all(|&l| l == 1 || l == -1));
    assert!(y.contains(&1) && y.contains(&-1));

    const POINTS_PER_SIDE: i64 = 5; // 11 grid points per free dimension
    let free = n - 1;
    let mut centers = vec![c / 2.0; free];
    let mut step = c / (2.0 * POINTS_PER_SIDE as f64);
    let mut best = DualSolution {
        alphas: vec![0.0; n],
        objective: 0.0, // alpha = 0 is always feasible
    };

    while step > 1e-5 * c {
        let mut combo = vec![-POINTS_PER_SIDE; free];
        loop {
            // Candidate for the free coordinates 1..n.
            let mut alphas = vec![0.0; n];
            let mut feasible = true;
            for (slot, (&center, &offset)) in alphas[1..].iter_mut().zip(centers.iter().zip(&combo))
            {
                let a = (center + offset as f64 * step).clamp(0.0, c);
                *slot = a;
            }
            // Eliminate alpha_0 through the equality constraint.
            let balance: f64 = alphas[1..]
                .iter()
                .zip(&y[1..])
                .map(|(&a, &l)| a * l as f64)
                .sum();
            let a0 = -balance * y[0] as f64;
            if (-1e-12..=c + 1e-12).contains(&a0) {
                alphas[0] = a0.clamp(0.0, c);
            } else {
                feasible = false;
            }
            if feasible {
                let objective = dual_objective(x, y, &alphas);
                if objective > best.objective {
                    best = DualSolution { alphas, objective };
                }
            }

            // Advance the mixed-radix counter over (-5..=5)^free.
            let mut dim = 0;
            loop {
                if dim == free {
                    break;
                }
                combo[dim] += 1;
                if combo[dim] <= POINTS_PER_SIDE {
                    break;
                }
                combo[dim] = -POINTS_PER_SIDE;
                dim += 1;
            }
            if dim == free {
                break;
            }
        }
        // Refine around the incumbent: window of ±2 old steps.
        centers = best.alphas[1..].to_vec();
        step *= 0.4;
    }
    best
}
