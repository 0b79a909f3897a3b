use thiserror::Error;

use crate::solver::SolverReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Frank parameter {0}: theta must be finite and nonzero")]
    InvalidParameter(f64),

    #[error("{name} = {value} is outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("|tau| = {0} >= 1 has no Frank parameter")]
    NonInvertible(f64),

    #[error("tau = 0 is the independence copula, which has no Frank parameter")]
    ZeroTau,

    #[error("invalid checkerboard density: {0}")]
    InvalidDensity(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("density evaluated to {value} at ({u}, {v})")]
    NonPositiveDensity { u: f64, v: f64, value: f64 },

    #[error("target tau {target} is not attainable on a {n}x{n} grid (|tau| must be below {max})")]
    TauInfeasible { target: f64, n: usize, max: f64 },

    #[error("solver exhausted its iteration limits (|tau error| = {:e}, stationarity residual = {:e})",
        (.0.achieved_tau - .0.config.target_tau).abs(), .0.stationarity_residual)]
    NoConvergence(Box<SolverReport>),

    #[error("fixed-point iteration diverged: {0}")]
    DivergenceDetected(String),

    #[error(
        "matrix scaling did not converge after {iterations} iterations (marginal error {error:e})"
    )]
    SinkhornNotConverged { iterations: usize, error: f64 },

    #[error("could not bracket target tau {target}: achieved tau range [{tau_lo}, {tau_hi}]")]
    BracketFailure {
        target: f64,
        tau_lo: f64,
        tau_hi: f64,
    },

    #[error("grid mismatch: {left}x{left} vs {right}x{right}")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Domain { .. } => "Domain",
            Error::NonInvertible(_) => "NonInvertible",
            Error::ZeroTau => "ZeroTau",
            Error::InvalidDensity(_) => "InvalidDensity",
            Error::InvalidKernel(_) => "InvalidKernel",
            Error::NonPositiveDensity { .. } => "NonPositiveDensity",
            Error::TauInfeasible { .. } => "TauInfeasible",
            Error::NoConvergence(_) => "NoConvergence",
            Error::DivergenceDetected(_) => "DivergenceDetected",
            Error::SinkhornNotConverged { .. } => "NotConverged",
            Error::BracketFailure { .. } => "BracketFailure",
            Error::GridMismatch { .. } => "GridMismatch",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}
