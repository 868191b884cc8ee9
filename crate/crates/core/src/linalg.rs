//! Dense symmetric linear algebra helpers.
//!
//! Parameter counts in choice models are small (K up to a few hundred), so a
//! plain O(K^3) Cholesky factorization is all the machinery needed here.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

/// Lower-triangular Cholesky factor of a symmetric matrix, or `None` when the
/// matrix is not (numerically) positive definite.
pub fn cholesky(a: &ArrayView2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Some(l)
}

/// Solves `A x = b` given the lower Cholesky factor `l` of `A`.
pub fn chol_solve(l: &Array2<f64>, b: &ArrayView1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[[i, k]] * y[k];
        }
        y[i] = sum / l[[i, i]];
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[[k, i]] * x[k];
        }
        x[i] = sum / l[[i, i]];
    }
    x
}

/// Inverse of `A` from its lower Cholesky factor, via K unit solves.
pub fn chol_inverse(l: &Array2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut inv = Array2::<f64>::zeros((n, n));
    let mut e = Array1::<f64>::zeros(n);
    for j in 0..n {
        e.fill(0.0);
        e[j] = 1.0;
        let col = chol_solve(l, &e.view());
        inv.column_mut(j).assign(&col);
    }
    // the solve columns agree only up to rounding; average out the drift
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (inv[[i, j]] + inv[[j, i]]);
            inv[[i, j]] = m;
            inv[[j, i]] = m;
        }
    }
    inv
}

/// Result of [`pd_repair`].
pub struct Repaired {
    /// `H + lambda I`, positive definite.
    pub matrix: Array2<f64>,
    /// Lower Cholesky factor of the repaired matrix.
    pub factor: Array2<f64>,
    /// Shift that was applied (0 when the input was already PD).
    pub lambda: f64,
}

/// Shifts a symmetric matrix by `lambda * I` (lambda doubling from
/// `1e-6 * mean(|diag|)`) until the Cholesky factorization succeeds.
///
/// Returns `None` once lambda exceeds `1e8 * max|H_ij|`; callers are expected
/// to fall back to a gradient step in that case.
pub fn pd_repair(h: &ArrayView2<f64>) -> Option<Repaired> {
    let n = h.nrows();
    if let Some(factor) = cholesky(h) {
        return Some(Repaired {
            matrix: h.to_owned(),
            factor,
            lambda: 0.0,
        });
    }
    let mean_diag = (0..n).map(|i| h[[i, i]].abs()).sum::<f64>() / n as f64;
    let norm = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut lambda = if mean_diag > 0.0 { 1e-6 * mean_diag } else { 1e-8 };
    let cap = 1e8 * norm.max(f64::MIN_POSITIVE);
    while lambda <= cap {
        let mut shifted = h.to_owned();
        for i in 0..n {
            shifted[[i, i]] += lambda;
        }
        if let Some(factor) = cholesky(&shifted.view()) {
            return Some(Repaired {
                matrix: shifted,
                factor,
                lambda,
            });
        }
        lambda *= 2.0;
    }
    None
}

/// Largest absolute entry-wise asymmetry, relative to the largest entry.
pub fn symmetry_gap(a: &ArrayView2<f64>) -> f64 {
    let n = a.nrows();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut gap = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            gap = gap.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    gap / scale
}
