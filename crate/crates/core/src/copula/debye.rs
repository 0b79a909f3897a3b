//! First-order Debye function and the Kendall's tau bridge of the Frank family.
//!
//! `D1(x) = (1/x) ∫₀ˣ t/(eᵗ−1) dt` is evaluated from two convergent series:
//!
//! * `|x| <= 2`: the Bernoulli expansion `1 − x/4 + Σₖ B₂ₖ x²ᵏ / ((2k+1)(2k)!)`,
//!   whose radius of convergence is 2π;
//! * `x > 2`: the tail `∫ₓ^∞ t/(eᵗ−1) dt = Σₖ e^{−kx}(x/k + 1/k²)` subtracted
//!   from `π²/6`.
//!
//! Negative arguments use `D1(−x) = D1(x) + x/2`.

use super::FrankParameter;
use crate::error::{Error, Result};

/// `B₂ₖ / ((2k+1)(2k)!)` for k = 1..=18.
#[allow(clippy::excessive_precision)]
const BERNOULLI_SERIES: [f64; 18] = [
    2.777_777_777_777_777_8e-2,
    -2.777_777_777_777_777_8e-4,
    4.724_111_866_969_009_8e-6,
    -9.185_773_074_661_963_6e-8,
    1.897_886_998_897_099_9e-9,
    -4.064_761_645_144_225_5e-11,
    8.921_691_020_456_452_6e-13,
    -1.993_929_586_072_107_6e-14,
    4.518_980_029_619_918_2e-16,
    -1.035_651_761_218_124_7e-17,
    2.395_218_621_026_186_7e-19,
    -5.581_785_874_325_009_3e-21,
    1.309_150_755_418_321_3e-22,
    -3.087_419_802_426_740_3e-24,
    7.315_975_652_702_203_4e-26,
    -1.740_845_657_234_000_7e-27,
    4.157_635_644_613_899_7e-29,
    -9.962_148_488_284_622_1e-31,
];

const SERIES_LIMIT: f64 = 2.0;

/// `Σₖ cₖ x^{2k}` over the Bernoulli coefficients (Horner in x²).
fn bernoulli_even_sum(x: f64) -> f64 {
    let x2 = x * x;
    let mut acc = 0.0;
    for &c in BERNOULLI_SERIES.iter().rev() {
        acc = acc * x2 + c;
    }
    acc * x2
}

/// `∫₀ˣ t/(eᵗ−1) dt` for x > 2.
fn debye_integral_tail(x: f64) -> f64 {
    let total = std::f64::consts::PI.powi(2) / 6.0;
    let mut tail = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-kf * x).exp() * (x / kf + 1.0 / (kf * kf));
        tail += term;
        if term < 1e-18 * total {
            break;
        }
    }
    total - tail
}

/// First-order Debye function `D1(x)`.
///
/// `D1(0)` returns the limit 1.
pub fn debye_d1(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let positive = if ax <= SERIES_LIMIT {
        1.0 - ax / 4.0 + bernoulli_even_sum(ax)
    } else if ax.is_infinite() {
        0.0
    } else {
        debye_integral_tail(ax) / ax
    };
    if x < 0.0 {
        positive + ax / 2.0
    } else {
        positive
    }
}

/// Kendall's tau of the Frank copula for `theta >= 0` (0 maps to 0).
fn tau_nonnegative(theta: f64) -> f64 {
    if theta <= SERIES_LIMIT {
        // τ = (4/θ)·Σₖ cₖ θ^{2k}, evaluated without the 1 − (1 − ...) cancellation.
        let x2 = theta * theta;
        let mut acc = 0.0;
        for &c in BERNOULLI_SERIES.iter().rev() {
            acc = acc * x2 + c;
        }
        4.0 * acc * theta
    } else {
        1.0 - 4.0 / theta * (1.0 - debye_d1(theta))
    }
}

/// dτ/dθ, an even function of θ.
fn tau_derivative(theta: f64) -> f64 {
    let x = theta.abs();
    if x <= SERIES_LIMIT {
        let x2 = x * x;
        let mut acc = 0.0;
        for (k, &c) in BERNOULLI_SERIES.iter().enumerate().rev() {
            acc = acc * x2 + (2 * k + 1) as f64 * c;
        }
        4.0 * acc
    } else {
        4.0 / (x * x) + 4.0 / (x * x.exp_m1()) - 8.0 * debye_d1(x) / (x * x)
    }
}

/// `τ = 1 − (4/θ)[1 − D1(θ)]`. Odd in θ by construction.
pub fn tau_from_theta(p: FrankParameter) -> f64 {
    let theta = p.theta();
    tau_nonnegative(theta.abs()).copysign(theta)
}

/// Inverts [`tau_from_theta`] so that `|tau_from_theta(result) − tau| <= tol`.
///
/// Bisection on a bracket that starts at `[1e-6, 50]` (mirrored for negative
/// tau) and grows geometrically, followed by Newton polishing that is only
/// accepted while it keeps shrinking the residual.
pub fn theta_from_tau(tau: f64, tol: f64) -> Result<FrankParameter> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Domain {
            name: "tol",
            value: tol,
            domain: "(0, inf)",
        });
    }
    if tau.is_nan() {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
            domain: "(-1, 1)",
        });
    }
    if tau.abs() >= 1.0 {
        return Err(Error::NonInvertible(tau));
    }
    if tau == 0.0 {
        return Err(Error::ZeroTau);
    }

    let target = tau.abs();
    let residual = |theta: f64| tau_nonnegative(theta) - target;

    let mut lo = 1e-6;
    let mut hi = 50.0;
    while residual(lo) > 0.0 {
        hi = lo;
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::NonInvertible(tau));
        }
    }
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NonInvertible(tau));
        }
    }

    let mut theta = 0.5 * (lo + hi);
    let mut r = residual(theta);
    while r.abs() > tol {
        if r < 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        theta = mid;
        r = residual(theta);
    }

    for _ in 0..4 {
        let slope = tau_derivative(theta);
        if slope.is_nan() || slope <= 0.0 {
            break;
        }
        let candidate = theta - r / slope;
        if !(candidate > 0.0 && candidate.is_finite()) {
            break;
        }
        let rc = residual(candidate);
        if rc.abs() >= r.abs() {
            break;
        }
        theta = candidate;
        r = rc;
    }

    FrankParameter::new(theta.copysign(tau))
}
