use ndarray::Array2;

use crate::checkerboard::CheckerboardDensity;
use crate::error::{Error, Result};

/// Iteration cap for a single projection.
pub const SINKHORN_MAX_ITER: usize = 100_000;

/// Relative row-sum error at which scaling stops (columns are exact after
/// each sweep).
const SINKHORN_TOL: f64 = 1e-13;

/// Scales a positive kernel to row and column sums `1/n`:
/// `Δ = diag(a) · K · diag(b)`.
///
/// Cross-ratios `K_ij K_kl / (K_il K_kj)` are untouched by diagonal scaling.
pub fn sinkhorn_project(kernel: &Array2<f64>) -> Result<CheckerboardDensity> {
    let (rows, cols) = kernel.dim();
    if rows != cols || rows == 0 {
        return Err(Error::InvalidKernel(format!(
            "kernel must be a nonempty square matrix, got {rows}x{cols}"
        )));
    }
    if let Some(bad) = kernel.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
        return Err(Error::InvalidKernel(format!(
            "kernel entries must be positive and finite, found {bad}"
        )));
    }
    let n = rows;
    let target = 1.0 / n as f64;
    let mut a = vec![1.0; n];
    let mut b = vec![1.0; n];
    let mut error = f64::INFINITY;

    for _ in 0..SINKHORN_MAX_ITER {
        for (i, ai) in a.iter_mut().enumerate() {
            let s: f64 = kernel.row(i).iter().zip(&b).map(|(k, bj)| k * bj).sum();
            *ai = target / s;
        }
        for (j, bj) in b.iter_mut().enumerate() {
            let s: f64 = kernel.column(j).iter().zip(&a).map(|(k, ai)| k * ai).sum();
            *bj = target / s;
        }
        error = (0..n)
            .map(|i| {
                let s: f64 = kernel.row(i).iter().zip(&b).map(|(k, bj)| k * bj).sum();
                (a[i] * s / target - 1.0).abs()
            })
            .fold(0.0, f64::max);
        if error <= SINKHORN_TOL {
            let masses = Array2::from_shape_fn((n, n), |(i, j)| a[i] * kernel[[i, j]] * b[j]);
            return Ok(CheckerboardDensity::from_masses_unchecked(masses));
        }
        if !error.is_finite() {
            break;
        }
    }
    Err(Error::SinkhornNotConverged {
        iterations: SINKHORN_MAX_ITER,
        error,
    })
}
