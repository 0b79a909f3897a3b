//! Closed-form Frank copula family.
//!
//! With `a(x) = e^{−θx}`, the cdf is `C(u,v) = −(1/θ)·ln F(u,v)` where
//! `F = 1 + (a(u)−1)(a(v)−1)/(a(1)−1)`. Every evaluator goes through a
//! numerically stable `ln F`:
//!
//! * θ > 0: `log1p` of the product form while `F >= 1/2`; below that the
//!   positive-term split `F·(1−a(1)) = a(u)(1−a(v)) + (a(v)−a(1))` is summed
//!   in log space, so nothing cancels as `F → 0` near `(1, 1)`.
//! * θ < 0: `ln F = softplus(ln expm1(|θ|u) + ln expm1(|θ|v) − ln expm1(|θ|))`,
//!   which never overflows.
//!
//! No upper bound on `|θ|` is imposed.

mod debye;

pub use debye::{debye_d1, tau_from_theta, theta_from_tau};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checkerboard::{CheckerboardDensity, DensityMeta};
use crate::error::{Error, Result};

/// Frank dependence parameter θ: finite and nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FrankParameter(f64);

impl FrankParameter {
    pub fn new(theta: f64) -> Result<Self> {
        if theta.is_finite() && theta != 0.0 {
            Ok(Self(theta))
        } else {
            Err(Error::InvalidParameter(theta))
        }
    }

    #[inline]
    pub fn theta(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FrankParameter {
    type Error = Error;

    fn try_from(theta: f64) -> Result<Self> {
        Self::new(theta)
    }
}

impl From<FrankParameter> for f64 {
    fn from(p: FrankParameter) -> f64 {
        p.0
    }
}

impl std::fmt::Display for FrankParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "theta={}", self.0)
    }
}

#[inline]
fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// `ln(eˣ − 1)` for x >= 0; `-inf` at 0.
#[inline]
fn ln_expm1(x: f64) -> f64 {
    if x > 35.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// `ln(1 − e^{−x})` for x >= 0; `-inf` at 0.
#[inline]
fn ln_one_minus_exp_neg(x: f64) -> f64 {
    if x > std::f64::consts::LN_2 {
        (-(-x).exp()).ln_1p()
    } else {
        (-(-x).exp_m1()).ln()
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln F(u, v)` with `C(u, v) = −ln F / θ`.
fn ln_f(theta: f64, u: f64, v: f64) -> f64 {
    if theta > 0.0 {
        let x = (-theta * u).exp_m1() * (-theta * v).exp_m1() / (-theta).exp_m1();
        if x >= -0.5 {
            return x.ln_1p();
        }
        let t1 = -theta * u + ln_one_minus_exp_neg(theta * v);
        let t2 = -theta * v + ln_one_minus_exp_neg(theta * (1.0 - v));
        log_add_exp(t1, t2) - ln_one_minus_exp_neg(theta)
    } else {
        let s = -theta;
        softplus(ln_expm1(s * u) + ln_expm1(s * v) - ln_expm1(s))
    }
}

/// Frank copula cdf `C_θ(u, v)`. Returns NaN outside the unit square.
pub fn frank_cdf(p: FrankParameter, u: f64, v: f64) -> f64 {
    if !(in_unit(u) && in_unit(v)) {
        return f64::NAN;
    }
    let theta = p.theta();
    let c = -ln_f(theta, u, v) / theta;
    c.clamp(0.0, u.min(v))
}

/// Frank copula density `c_θ(u, v)`. Returns NaN outside the unit square.
pub fn frank_density(p: FrankParameter, u: f64, v: f64) -> f64 {
    if !(in_unit(u) && in_unit(v)) {
        return f64::NAN;
    }
    frank_log_density(p.theta(), u, v).exp()
}

/// `ln c_θ(u,v) = ln(θ/(1−e^{−θ})) − θ(u+v) − 2 ln F(u,v)`.
fn frank_log_density(theta: f64, u: f64, v: f64) -> f64 {
    let scale = if theta > 0.0 {
        theta.ln() - ln_one_minus_exp_neg(theta)
    } else {
        (-theta).ln() - ln_expm1(-theta)
    };
    scale - theta * (u + v) - 2.0 * ln_f(theta, u, v)
}

/// Generator `ψ_θ(t) = −(1/θ)·ln(1 − (1 − e^{−θ})e^{−t})` for t >= 0.
pub fn frank_generator(p: FrankParameter, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain {
            name: "t",
            value: t,
            domain: "[0, inf)",
        });
    }
    let theta = p.theta();
    let value = if theta > 0.0 {
        -((-theta).exp_m1() * (-t).exp()).ln_1p() / theta
    } else {
        // 1 + (e^{|θ|} − 1)e^{−t} = softplus(ln expm1(|θ|) − t)
        softplus(ln_expm1(-theta) - t) / -theta
    };
    Ok(value)
}

/// Inverse generator `ψ⁻¹_θ(s) = −ln((e^{−θs} − 1)/(e^{−θ} − 1))` for s in (0, 1].
pub fn frank_generator_inverse(p: FrankParameter, s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain {
            name: "s",
            value: s,
            domain: "(0, 1]",
        });
    }
    let theta = p.theta();
    let value = if theta > 0.0 {
        ln_one_minus_exp_neg(theta) - ln_one_minus_exp_neg(theta * s)
    } else {
        ln_expm1(-theta) - ln_expm1(-theta * s)
    };
    Ok(value)
}

/// Inverse of the conditional cdf `∂C/∂u (u, ·)` at level `w`.
fn conditional_quantile(theta: f64, u: f64, w: f64) -> f64 {
    let v = if theta.abs() < 1.0 {
        // y = e^{−θv} − 1 = w(e^{−θ} − 1) / (w + (1 − w)e^{−θu})
        let y = w * (-theta).exp_m1() / (w + (1.0 - w) * (-theta * u).exp());
        -y.ln_1p() / theta
    } else {
        // 1 + y = ((1−w)e^{−θu} + w e^{−θ}) / (w + (1−w)e^{−θu})
        let lw = w.ln();
        let l1w = (-w).ln_1p();
        let num = log_add_exp(l1w - theta * u, lw - theta);
        let den = log_add_exp(lw, l1w - theta * u);
        -(num - den) / theta
    };
    v.clamp(0.0, 1.0)
}

/// Draws `count` pairs by conditional inversion; deterministic for a given seed.
pub fn frank_sample(p: FrankParameter, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = p.theta();
    (0..count)
        .map(|_| {
            let u: f64 = rng.gen();
            let w: f64 = rng.gen();
            (u, conditional_quantile(theta, u, w))
        })
        .collect()
}

/// Frank cdf on the `(n+1)×(n+1)` node grid `(i/n, j/n)`, with the copula
/// boundary values written exactly.
pub fn frank_node_cdf(p: FrankParameter, n: usize) -> Array2<f64> {
    let nf = n as f64;
    Array2::from_shape_fn((n + 1, n + 1), |(i, j)| {
        if i == 0 || j == 0 {
            0.0
        } else if i == n {
            j as f64 / nf
        } else if j == n {
            i as f64 / nf
        } else {
            frank_cdf(p, i as f64 / nf, j as f64 / nf)
        }
    })
}

/// Checkerboard approximation: cell masses are the second differences of the
/// cdf over each grid cell. Round-off negatives (only possible for extreme θ)
/// are clamped to zero.
pub fn frank_checkerboard(p: FrankParameter, n: usize) -> Result<CheckerboardDensity> {
    if n == 0 {
        return Err(Error::InvalidDensity("grid size must be positive".into()));
    }
    let cdf = frank_node_cdf(p, n);
    let masses = Array2::from_shape_fn((n, n), |(i, j)| {
        let d = cdf[[i + 1, j + 1]] - cdf[[i, j + 1]] - cdf[[i + 1, j]] + cdf[[i, j]];
        d.max(0.0)
    });
    let meta = DensityMeta {
        tau: Some(tau_from_theta(p)),
        theta: Some(p.theta()),
    };
    CheckerboardDensity::with_meta(masses, meta)
}
