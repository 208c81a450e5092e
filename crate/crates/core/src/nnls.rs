//! Active-set solvers for nonnegativity-constrained quadratic programs.
//!
//! [`nnqp`] minimizes `½ λᵀQλ + cᵀλ` over `λ ≥ 0` for a symmetric positive
//! semidefinite `Q` with a Lawson–Hanson style active set. [`nnls`] is the
//! least-squares special case `min ‖Aλ − b‖`, `λ ≥ 0`.
//!
//! Entering indices are chosen by the largest dual residual with ties
//! broken by the smallest index, so results are deterministic for a given
//! column order. Passive-set subproblems are solved with an SVD
//! pseudo-inverse, which keeps duplicated or dependent columns from
//! blowing up.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct NnqpSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `½ xᵀQx + cᵀx` subject to `x ≥ 0`.
pub fn nnqp(q: &DMatrix<f64>, c: &DVector<f64>) -> NnqpSolution {
    let m = c.len();
    assert_eq!(q.nrows(), m);
    assert_eq!(q.ncols(), m);
    if m == 0 {
        return NnqpSolution { x: vec![], iterations: 0, converged: true };
    }

    let scale = 1.0 + c.amax() + q.amax();
    let tol = 1e-13 * scale;
    let max_outer = 3 * m + 30;

    let mut x = DVector::<f64>::zeros(m);
    let mut passive = vec![false; m];
    let mut iterations = 0;

    for _ in 0..max_outer {
        iterations += 1;
        // Dual residual w = −(Qx + c); positive entries can still decrease
        // the objective by leaving zero.
        let w = -(q * &x + c);
        let mut blocked = vec![false; m];
        let entering = loop {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..m {
                if passive[j] || blocked[j] {
                    continue;
                }
                if w[j] > tol && best.is_none_or(|(_, b)| w[j] > b) {
                    best = Some((j, w[j]));
                }
            }
            let Some((j, _)) = best else { break None };
            // Reject a candidate whose unconstrained subproblem value would
            // not be positive (numerical degeneracy); try the next one.
            passive[j] = true;
            let z = solve_passive(q, c, &passive);
            if z[j] > 0.0 {
                break Some(z);
            }
            passive[j] = false;
            blocked[j] = true;
        };
        let Some(mut z) = entering else {
            return NnqpSolution { x: x.iter().copied().collect(), iterations, converged: true };
        };

        // Inner loop: walk back towards feasibility.
        let mut inner = 0;
        loop {
            inner += 1;
            if inner > 3 * m + 10 {
                return NnqpSolution { x: x.iter().copied().collect(), iterations, converged: false };
            }
            let mut alpha = f64::INFINITY;
            for i in 0..m {
                if passive[i] && z[i] <= 0.0 {
                    let denom = x[i] - z[i];
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            if alpha.is_infinite() {
                x = z;
                break;
            }
            for i in 0..m {
                if passive[i] {
                    x[i] += alpha * (z[i] - x[i]);
                }
            }
            for i in 0..m {
                if passive[i] && x[i] <= tol * 1e-3 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
            z = solve_passive(q, c, &passive);
        }
    }
    NnqpSolution { x: x.iter().copied().collect(), iterations, converged: false }
}

/// Solves `Q_PP z_P = −c_P` with `z = 0` off the passive set.
fn solve_passive(q: &DMatrix<f64>, c: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let k = idx.len();
    let mut z = DVector::zeros(passive.len());
    if k == 0 {
        return z;
    }
    let sub = DMatrix::from_fn(k, k, |a, b| q[(idx[a], idx[b])]);
    let rhs = DVector::from_fn(k, |a, _| -c[idx[a]]);
    let svd = sub.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max().max(f64::MIN_POSITIVE);
    let sol = svd.solve(&rhs, eps).unwrap_or_else(|_| DVector::zeros(k));
    for (a, &i) in idx.iter().enumerate() {
        z[i] = sol[a];
    }
    z
}

/// Nonnegative least squares `min ‖Aλ − b‖` over `λ ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> NnqpSolution {
    let q = a.transpose() * a;
    let c = -(a.transpose() * b);
    nnqp(&q, &c)
}
