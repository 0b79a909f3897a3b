//! Kendall's tau functionals and the local-dependence (Liouville) checks.
//!
//! For a checkerboard density with masses `Δ`, the tau of the copula is the
//! quadratic form `τ(Δ) = Σ_{ij} Δ_ij S_ij(Δ)` with the concordance potential
//! `S_ij = Σ_{kl} sgn(i−k)·sgn(j−l)·Δ_kl` (`sgn(0) = 0`). Pairs of points that
//! share a row band or a column band contribute nothing: inside one band both
//! coordinates of a pair are independent uniforms, so the sign expectation is
//! zero. `∂τ/∂Δ_ij = 2 S_ij`.

use ndarray::Array2;

use crate::checkerboard::{CheckerboardDensity, GridFunction};
use crate::copula::{frank_cdf, FrankParameter};
use crate::error::{Error, Result};

/// Signed quadrant sums `S_ij` of a checkerboard density.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcordancePotential {
    values: Array2<f64>,
}

impl ConcordancePotential {
    #[inline]
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    #[inline]
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }
}

/// `S_ij` for an arbitrary square matrix in O(n²).
///
/// With `P(a, b) = Σ_{k<a, l<b} Δ_kl` (so row `i` spans `P(i..=i+1, ·)`):
///
/// ```text
/// S_ij =  P(i, j)                                   k < i, l < j
///       + T − P(i+1, n) − P(n, j+1) + P(i+1, j+1)   k > i, l > j
///       − (P(i, n) − P(i, j+1))                     k < i, l > j
///       − (P(n, j) − P(i+1, j))                     k > i, l < j
/// ```
pub(crate) fn signed_quadrant_sums(masses: &Array2<f64>) -> Array2<f64> {
    let n = masses.nrows();
    let mut p = Array2::<f64>::zeros((n + 1, n + 1));
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += masses[[i, j]];
            p[[i + 1, j + 1]] = p[[i, j + 1]] + row;
        }
    }
    let total = p[[n, n]];
    Array2::from_shape_fn((n, n), |(i, j)| {
        let below_left = p[[i, j]];
        let above_right = total - p[[i + 1, n]] - p[[n, j + 1]] + p[[i + 1, j + 1]];
        let below_right = p[[i, n]] - p[[i, j + 1]];
        let above_left = p[[n, j]] - p[[i + 1, j]];
        (below_left + above_right) - (below_right + above_left)
    })
}

/// `τ(Δ) = ⟨Δ, S(Δ)⟩` for an arbitrary square matrix.
pub(crate) fn tau_of_masses(masses: &Array2<f64>) -> f64 {
    let s = signed_quadrant_sums(masses);
    masses.iter().zip(s.iter()).map(|(d, s)| d * s).sum()
}

pub fn concordance_potential(c: &CheckerboardDensity) -> ConcordancePotential {
    ConcordancePotential {
        values: signed_quadrant_sums(c.masses()),
    }
}

/// Kendall's tau of the checkerboard copula.
pub fn kendall_tau_checkerboard(c: &CheckerboardDensity) -> f64 {
    tau_of_masses(c.masses())
}

/// Kendall's tau of a sample, `(concordant − discordant) / C(N, 2)` with tied
/// pairs counted as zero. O(N log N) via merge-sort swap counting.
pub fn kendall_tau_sample(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len();
    if n < 2 {
        return f64::NAN;
    }
    let mut sorted: Vec<(f64, f64)> = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let pairs_total = (n as u64) * (n as u64 - 1) / 2;
    let mut ties_x = 0u64;
    let mut ties_xy = 0u64;
    let mut run_x = 1u64;
    let mut run_xy = 1u64;
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 {
            run_x += 1;
            if w[0].1 == w[1].1 {
                run_xy += 1;
            } else {
                ties_xy += run_xy * (run_xy - 1) / 2;
                run_xy = 1;
            }
        } else {
            ties_x += run_x * (run_x - 1) / 2;
            ties_xy += run_xy * (run_xy - 1) / 2;
            run_x = 1;
            run_xy = 1;
        }
    }
    ties_x += run_x * (run_x - 1) / 2;
    ties_xy += run_xy * (run_xy - 1) / 2;

    let mut ys: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut ties_y = 0u64;
    let mut run_y = 1u64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run_y += 1;
        } else {
            ties_y += run_y * (run_y - 1) / 2;
            run_y = 1;
        }
    }
    ties_y += run_y * (run_y - 1) / 2;

    let numerator =
        pairs_total as f64 - ties_x as f64 - ties_y as f64 + ties_xy as f64 - 2.0 * swaps as f64;
    numerator / pairs_total as f64
}

/// Stable merge sort returning the number of strict inversions.
fn merge_count(xs: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = xs.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (left, right) = xs.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(left, bl) + merge_count(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if xs[j] < xs[i] {
            buf[k] = xs[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = xs[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&xs[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&xs[j..n]);
    xs.copy_from_slice(&buf[..n]);
    swaps
}

/// Residual of the proportional local-dependence equation
/// `∂²/∂u∂v log c = constant · c` at the interior nodes `(i/n, j/n)`.
///
/// The mixed derivative uses the centered four-point stencil with `h = 1/n`;
/// the result is O(h²) when `constant` is the true proportionality. Boundary
/// nodes of the returned grid hold 0.
pub fn liouville_residual<F>(density_eval: F, constant: f64, n: usize) -> Result<GridFunction>
where
    F: Fn(f64, f64) -> f64,
{
    if n < 8 {
        return Err(Error::Domain {
            name: "n",
            value: n as f64,
            domain: "n >= 8",
        });
    }
    let nf = n as f64;
    let h = 1.0 / nf;

    // log density at every node; the stencil only reaches neighbouring nodes.
    let mut log_c = Array2::<f64>::zeros((n + 1, n + 1));
    for i in 0..=n {
        for j in 0..=n {
            let (u, v) = (i as f64 / nf, j as f64 / nf);
            let c = density_eval(u, v);
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::NonPositiveDensity { u, v, value: c });
            }
            log_c[[i, j]] = c.ln();
        }
    }

    let mut residual = Array2::<f64>::zeros((n + 1, n + 1));
    for i in 1..n {
        for j in 1..n {
            let mixed = (log_c[[i + 1, j + 1]] - log_c[[i + 1, j - 1]] - log_c[[i - 1, j + 1]]
                + log_c[[i - 1, j - 1]])
                / (4.0 * h * h);
            residual[[i, j]] = mixed - constant * log_c[[i, j]].exp();
        }
    }
    GridFunction::new(residual)
}

/// `F(u, v) = (e^{−θ} − e^{−θv} − e^{−θu} + e^{−θ(u+v)}) / (e^{−θ} − 1)`, the
/// bilinear form in `(1, e^{−θu})` and `(1, e^{−θv})` whose negative log over θ
/// is the Frank cdf.
pub fn frank_f(p: FrankParameter, u: f64, v: f64) -> f64 {
    let t = p.theta();
    let e = (-t).exp();
    (e - (-t * v).exp() - (-t * u).exp() + (-t * (u + v)).exp()) / (e - 1.0)
}

/// Sup over the `(n+1)×(n+1)` node grid of `|frank_cdf − (−ln F / θ)|`.
pub fn frank_f_identity(p: FrankParameter, n: usize) -> f64 {
    let n = n.max(1);
    let nf = n as f64;
    let t = p.theta();
    let mut sup: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            let (u, v) = (i as f64 / nf, j as f64 / nf);
            let via_f = -frank_f(p, u, v).ln() / t;
            sup = sup.max((frank_cdf(p, u, v) - via_f).abs());
        }
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn diagonal_two_by_two() {
        let c = CheckerboardDensity::new(array![[0.5, 0.0], [0.0, 0.5]]).unwrap();
        assert!((kendall_tau_checkerboard(&c) - 0.5).abs() < 1e-15);
        // S_01 pairs cell (0, 1) with (1, 0) (empty) and (1, 1) (tied column): 0
        let s = concordance_potential(&c);
        assert_eq!(s.values(), &array![[0.5, 0.0], [0.0, 0.5]]);
    }

    #[test]
    fn uniform_has_zero_tau() {
        for n in 1..8 {
            let c = CheckerboardDensity::uniform(n).unwrap();
            assert!(kendall_tau_checkerboard(&c).abs() < 1e-15);
        }
    }

    #[test]
    fn sample_tau_small_cases() {
        assert_eq!(kendall_tau_sample(&[(0.0, 0.0), (1.0, 1.0)]), 1.0);
        assert_eq!(kendall_tau_sample(&[(0.0, 1.0), (1.0, 0.0)]), -1.0);
        assert_eq!(kendall_tau_sample(&[(0.0, 1.0), (0.0, 0.0)]), 0.0);
        assert_eq!(kendall_tau_sample(&[(0.0, 0.0), (0.0, 0.0)]), 0.0);
        assert!(kendall_tau_sample(&[(0.0, 0.0)]).is_nan());
    }

    #[test]
    fn liouville_rejects_small_grid_and_nonpositive_density() {
        assert!(liouville_residual(|_, _| 1.0, 0.0, 4).is_err());
        let err = liouville_residual(|u, _| u - 0.5, 0.0, 8).unwrap_err();
        assert!(matches!(err, Error::NonPositiveDensity { .. }));
    }

    #[test]
    fn independence_residual_is_exactly_zero() {
        let r = liouville_residual(|_, _| 1.0, 0.0, 16).unwrap();
        assert_eq!(r.sup_abs(), 0.0);
    }

    #[test]
    fn f_corners() {
        let p = FrankParameter::new(2.0).unwrap();
        assert!((frank_f(p, 0.0, 0.0) - 1.0).abs() <= 1e-15);
        assert!((frank_f(p, 1.0, 1.0) - (-2.0f64).exp()).abs() <= 1e-15);
    }
}
