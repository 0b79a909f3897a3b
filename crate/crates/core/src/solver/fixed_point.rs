use ndarray::Array2;

use super::{sinkhorn_project, SolverConfig, SolverState};
use crate::concordance::signed_quadrant_sums;
use crate::error::{Error, Result};

/// Damping is halved on oscillation but never below this.
const MIN_DAMPING: f64 = 1.0 / 1024.0;

/// Decomposition of `R_ij = ln(n² Δ_ij) − 2 λ_d S_ij` into `α_i + β_j`
/// (least squares, i.e. double centering) plus what is left over.
#[derive(Debug, Clone)]
pub struct Stationarity {
    /// `sup_ij |R_ij − α_i − β_j|`; zero exactly at a fixed point.
    pub residual: f64,
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
    pub(crate) log_gap: Array2<f64>,
}

pub fn stationarity(masses: &Array2<f64>, lambda_d: f64) -> Stationarity {
    let n = masses.nrows();
    let nf = n as f64;
    let n2 = nf * nf;
    let s = signed_quadrant_sums(masses);
    let r = Array2::from_shape_fn((n, n), |(i, j)| {
        (n2 * masses[[i, j]]).ln() - 2.0 * lambda_d * s[[i, j]]
    });
    let row_means: Vec<f64> = r.rows().into_iter().map(|row| row.sum() / nf).collect();
    let col_means: Vec<f64> = r.columns().into_iter().map(|col| col.sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let row_potentials: Vec<f64> = row_means.iter().map(|m| m - grand).collect();
    let col_potentials = col_means;
    let residual = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (r[[i, j]] - row_potentials[i] - col_potentials[j]).abs())
        .fold(0.0, f64::max);
    Stationarity {
        residual,
        row_potentials,
        col_potentials,
        log_gap: r,
    }
}

#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub state: SolverState,
    pub iterations: usize,
    pub residual: f64,
    /// Sup-norm mass change of the final update (0 if no update was needed).
    pub last_change: f64,
    /// Damping in effect at exit.
    pub damping: f64,
}

/// Fixed point of `Δ ↦ Sinkhorn(exp(2 λ_d S(Δ)))` for a fixed multiplier,
/// warm-started from `state`.
///
/// The update is relaxed in log space, `E = (1−d) ln Δ + d·2λ_d S(Δ)`, with
/// the first step taken undamped; `d` is halved after two consecutive
/// residual increases. Stops once the stationarity residual is at most
/// `cfg.tol_fix`.
pub fn inner_fixed_point(
    state: &SolverState,
    lambda_d: f64,
    cfg: &SolverConfig,
) -> Result<InnerOutcome> {
    if !lambda_d.is_finite() {
        return Err(Error::DivergenceDetected(format!("multiplier {lambda_d}")));
    }
    let mut masses = state.density.masses().clone();
    if masses.iter().any(|&m| m.is_nan() || m <= 0.0) {
        return Err(Error::InvalidDensity(
            "fixed-point iteration needs a strictly positive density".into(),
        ));
    }
    let mut damping = 1.0;
    let mut prev_residual = f64::INFINITY;
    let mut increases = 0;
    let mut last_change = 0.0;

    for iteration in 0..=cfg.max_inner {
        let st = stationarity(&masses, lambda_d);
        if st.residual <= cfg.tol_fix {
            let density = crate::checkerboard::CheckerboardDensity::from_masses_unchecked(masses);
            return Ok(InnerOutcome {
                state: SolverState {
                    density,
                    multiplier: lambda_d,
                    row_potentials: st.row_potentials,
                    col_potentials: st.col_potentials,
                },
                iterations: iteration,
                residual: st.residual,
                last_change,
                damping,
            });
        }
        if iteration == cfg.max_inner {
            return Err(Error::DivergenceDetected(format!(
                "no contraction within {} iterations at multiplier {lambda_d} (residual {:e})",
                cfg.max_inner, st.residual
            )));
        }

        if st.residual > prev_residual {
            increases += 1;
            if increases >= 2 {
                damping = (damping * 0.5).max(MIN_DAMPING);
                increases = 0;
            }
        } else {
            increases = 0;
        }
        prev_residual = st.residual;

        // E = ln Δ − d·R differs from (1−d) ln Δ + d·2λS only by row/column
        // terms, which the projection absorbs.
        let exponent = Array2::from_shape_fn(masses.dim(), |(i, j)| {
            masses[[i, j]].ln() - damping * st.log_gap[[i, j]]
        });
        let top = exponent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let kernel = exponent.mapv(|e| (e - top).exp());
        if kernel.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
            return Err(Error::DivergenceDetected(format!(
                "kernel underflow at multiplier {lambda_d}"
            )));
        }
        let next = sinkhorn_project(&kernel)?.into_masses();
        if next.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::DivergenceDetected(format!(
                "cell mass underflow at multiplier {lambda_d}"
            )));
        }
        last_change = next
            .iter()
            .zip(masses.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()));
        masses = next;
        damping = if iteration == 0 { cfg.damping } else { damping };
    }
    unreachable!("loop returns on its final iteration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checkerboard::CheckerboardDensity;
    use crate::concordance::kendall_tau_checkerboard;
    use ndarray::array;

    #[test]
    fn zero_multiplier_from_uniform_needs_no_iteration() {
        let cfg = SolverConfig::new(5, 0.0);
        let out = inner_fixed_point(&SolverState::uniform(5).unwrap(), 0.0, &cfg).unwrap();
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn zero_multiplier_reaches_uniform_in_one_pass() {
        let cfg = SolverConfig::new(2, 0.0);
        let start = SolverState {
            density: CheckerboardDensity::new(array![[0.4, 0.1], [0.1, 0.4]]).unwrap(),
            multiplier: 0.0,
            row_potentials: vec![0.0; 2],
            col_potentials: vec![0.0; 2],
        };
        let out = inner_fixed_point(&start, 0.0, &cfg).unwrap();
        assert_eq!(out.iterations, 1);
        for &m in out.state.density.masses() {
            assert!((m - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn positive_multiplier_gives_positive_tau_and_stationarity() {
        let cfg = SolverConfig::new(4, 0.0);
        let out = inner_fixed_point(&SolverState::uniform(4).unwrap(), 0.05, &cfg).unwrap();
        assert!(kendall_tau_checkerboard(&out.state.density) > 0.0);
        assert!(out.residual <= cfg.tol_fix);
        assert!(out.state.density.max_marginal_error() < 1e-10);
        let st = stationarity(out.state.density.masses(), 0.05);
        assert!(st.residual <= cfg.tol_fix);
    }

    #[test]
    fn rejects_zero_mass_start() {
        let start = SolverState {
            density: CheckerboardDensity::new(array![[0.5, 0.0], [0.0, 0.5]]).unwrap(),
            multiplier: 0.0,
            row_potentials: vec![0.0; 2],
            col_potentials: vec![0.0; 2],
        };
        assert!(inner_fixed_point(&start, 0.1, &SolverConfig::new(2, 0.0)).is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let mut cfg = SolverConfig::new(8, 0.0);
        cfg.max_inner = 2;
        let err = inner_fixed_point(&SolverState::uniform(8).unwrap(), 0.75, &cfg).unwrap_err();
        assert!(matches!(err, Error::DivergenceDetected(_)));
    }
}
