//! Minimum-information checkerboard copula under a fixed Kendall's tau.
//!
//! Discrete problem: minimize `Σ Δ_ij ln(n² Δ_ij)` over cell masses with row
//! and column sums `1/n` and `τ(Δ) = target`. Stationarity of the Lagrangian
//! gives the Gibbs form
//!
//! ```text
//! ln(n² Δ_ij) = α_i + β_j + 2 λ_d S_ij(Δ)
//! ```
//!
//! with `S` the concordance potential. For a fixed multiplier `λ_d` the
//! solution is a fixed point of `Δ ↦ Sinkhorn(exp(2 λ_d S(Δ)))`
//! ([`inner_fixed_point`]); [`outer_multiplier_search`] then tunes `λ_d` until
//! the tau constraint holds. In the continuum the multiplier and the Frank
//! parameter are tied by `θ = 4λ`, which the report exposes as
//! `implied_theta`; at finite `n` the gap is discretization error.
//!
//! The constraint is quadratic and indefinite, so the solver returns a
//! stationary point; uniqueness is not established.

mod fixed_point;
mod search;
mod sinkhorn;

pub use fixed_point::{inner_fixed_point, stationarity, InnerOutcome, Stationarity};
pub use search::{outer_multiplier_search, SearchOutcome, SearchPoint};
pub use sinkhorn::{sinkhorn_project, SINKHORN_MAX_ITER};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::checkerboard::{CheckerboardDensity, DensityMeta};
use crate::concordance::tau_of_masses;
use crate::error::{Error, Result};

/// Starting multiplier for the outer search.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "MultiplierInitWire", try_from = "MultiplierInitWire")]
pub enum MultiplierInit {
    /// `theta_from_tau(target) / 4`.
    #[default]
    Auto,
    Value(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MultiplierInitWire {
    Value(f64),
    Tag(String),
}

impl From<MultiplierInit> for MultiplierInitWire {
    fn from(m: MultiplierInit) -> Self {
        match m {
            MultiplierInit::Auto => MultiplierInitWire::Tag("auto".into()),
            MultiplierInit::Value(v) => MultiplierInitWire::Value(v),
        }
    }
}

impl TryFrom<MultiplierInitWire> for MultiplierInit {
    type Error = String;

    fn try_from(w: MultiplierInitWire) -> std::result::Result<Self, String> {
        match w {
            MultiplierInitWire::Value(v) => Ok(MultiplierInit::Value(v)),
            MultiplierInitWire::Tag(t) if t == "auto" => Ok(MultiplierInit::Auto),
            MultiplierInitWire::Tag(t) => Err(format!("unknown multiplier_init {t:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n: usize,
    pub target_tau: f64,
    /// Tolerance on `|τ(Δ) − target|`.
    pub tol_tau: f64,
    /// Tolerance on the sup-norm stationarity residual (log-density units).
    pub tol_fix: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Log-space relaxation of the fixed-point update, in (0, 1].
    pub damping: f64,
    pub multiplier_init: MultiplierInit,
}

impl SolverConfig {
    pub fn new(n: usize, target_tau: f64) -> Self {
        Self {
            n,
            target_tau,
            tol_tau: 1e-6,
            tol_fix: 1e-9,
            max_outer: 60,
            max_inner: 5000,
            damping: 0.5,
            multiplier_init: MultiplierInit::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !(self.target_tau.is_finite() && self.target_tau.abs() < 1.0) {
            return bad(format!(
                "target_tau {} must lie in (-1, 1)",
                self.target_tau
            ));
        }
        if !(self.tol_tau > 0.0 && self.tol_tau.is_finite()) {
            return bad(format!("tol_tau {} must be positive", self.tol_tau));
        }
        if !(self.tol_fix > 0.0 && self.tol_fix.is_finite()) {
            return bad(format!("tol_fix {} must be positive", self.tol_fix));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad(format!("damping {} must lie in (0, 1]", self.damping));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("iteration limits must be positive".into());
        }
        if let MultiplierInit::Value(v) = self.multiplier_init {
            if !v.is_finite() {
                return bad(format!("multiplier_init {v} must be finite"));
            }
        }
        Ok(())
    }
}

/// Iterate of the solver: density, discrete multiplier and the additive
/// potentials `α_i`, `β_j` of the Gibbs form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub density: CheckerboardDensity,
    pub multiplier: f64,
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
}

impl SolverState {
    /// Uniform density with zero multiplier.
    pub fn uniform(n: usize) -> Result<Self> {
        Ok(Self {
            density: CheckerboardDensity::uniform(n)?,
            multiplier: 0.0,
            row_potentials: vec![0.0; n],
            col_potentials: vec![0.0; n],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub config: SolverConfig,
    pub state: SolverState,
    pub achieved_tau: f64,
    pub stationarity_residual: f64,
    pub outer_iterations: usize,
    pub inner_iterations_total: usize,
    pub converged: bool,
    /// `4 λ_d`.
    pub implied_theta: f64,
    /// `Σ Δ ln(n² Δ)`.
    pub information: f64,
    /// Every `(λ_d, τ)` evaluated by the outer search, in evaluation order.
    pub search_trace: Vec<SearchPoint>,
    /// Whether τ was nondecreasing in λ_d over the evaluated points.
    pub monotone_trace: bool,
}

impl SolverReport {
    pub fn density(&self) -> &CheckerboardDensity {
        &self.state.density
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Negative entropy `Σ Δ_ij ln(n² Δ_ij)` of a checkerboard density, i.e. the
/// integral of `c ln c` for its piecewise-constant density `c = n² Δ`.
pub fn information(c: &CheckerboardDensity) -> f64 {
    let n2 = (c.n() * c.n()) as f64;
    c.masses()
        .iter()
        .map(|&m| if m > 0.0 { m * (n2 * m).ln() } else { 0.0 })
        .sum()
}

/// Largest |τ| attainable on an `n×n` grid: the tau of the diagonal
/// checkerboard (masses `1/n` on the diagonal).
pub fn tau_max(n: usize) -> f64 {
    let diag = Array2::from_shape_fn((n, n), |(i, j)| if i == j { 1.0 / n as f64 } else { 0.0 });
    tau_of_masses(&diag)
}

/// Solves the discrete problem; errors with [`Error::NoConvergence`] (carrying
/// the best iterate) when the iteration limits run out.
pub fn solve_mick(cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let max = tau_max(cfg.n);
    if cfg.target_tau != 0.0 && cfg.target_tau.abs() >= max {
        return Err(Error::TauInfeasible {
            target: cfg.target_tau,
            n: cfg.n,
            max,
        });
    }

    let outcome = outer_multiplier_search(cfg)?;
    let mut state = outcome.state;
    let implied_theta = 4.0 * state.multiplier;
    state.density.set_meta(DensityMeta {
        tau: Some(outcome.achieved_tau),
        theta: Some(implied_theta),
    });
    let report = SolverReport {
        config: *cfg,
        information: information(&state.density),
        state,
        achieved_tau: outcome.achieved_tau,
        stationarity_residual: outcome.stationarity_residual,
        outer_iterations: outcome.outer_iterations,
        inner_iterations_total: outcome.inner_iterations_total,
        converged: outcome.converged,
        implied_theta,
        monotone_trace: search::is_monotone(&outcome.trace),
        search_trace: outcome.trace,
    };
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NoConvergence(Box::new(report)))
    }
}
