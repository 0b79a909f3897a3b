//! Experiment runner: MICK vs Frank checkerboard comparisons and grid sweeps.

mod svg;

pub use svg::sweep_svg;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkerboard::{sup_mass_difference, CheckerboardDensity};
use crate::copula::{frank_checkerboard, theta_from_tau, FrankParameter};
use crate::error::{Error, Result};
use crate::solver::{solve_mick, SolverConfig, SolverReport};

/// Environment variable capping the number of concurrent solves in a sweep.
pub const THREADS_ENV: &str = "MICK_THREADS";

/// Default grid sizes of a convergence sweep.
pub const DEFAULT_GRIDS: [usize; 5] = [4, 8, 16, 32, 64];

/// `sup_ij |Π_ij − Δ_ij|` between a solver density and the Frank checkerboard
/// on the same grid.
pub fn compare_to_frank(report: &SolverReport, p: FrankParameter) -> Result<f64> {
    let density = report.density();
    let frank = frank_checkerboard(p, density.n())?;
    sup_mass_difference(density, &frank)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub tau: f64,
    /// Frank parameter paired with `tau`; `None` for `tau = 0`, where the
    /// reference is the uniform checkerboard.
    pub theta: Option<f64>,
    pub grid_sizes: Vec<usize>,
    /// `None` where the solve failed without producing an iterate.
    pub sup_errors: Vec<Option<f64>>,
    pub per_run_reports: Vec<Option<SolverReport>>,
    /// Error message per run, if any (a run that hit its iteration limit keeps
    /// its best report and is flagged here as well).
    pub failures: Vec<Option<String>>,
}

impl SweepResult {
    pub fn is_complete(&self) -> bool {
        self.failures.iter().all(Option::is_none)
    }

    /// CSV with header `n,sup_error,achieved_tau,implied_theta,converged`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "n",
            "sup_error",
            "achieved_tau",
            "implied_theta",
            "converged",
        ])?;
        for (k, &n) in self.grid_sizes.iter().enumerate() {
            let fmt = |x: Option<f64>| x.map_or_else(|| "NaN".to_string(), |v| v.to_string());
            let report = self.per_run_reports[k].as_ref();
            w.write_record(&[
                n.to_string(),
                fmt(self.sup_errors[k]),
                fmt(report.map(|r| r.achieved_tau)),
                fmt(report.map(|r| r.implied_theta)),
                report.is_some_and(|r| r.converged).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One row of a sweep CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub sup_error: f64,
    pub achieved_tau: f64,
    pub implied_theta: f64,
    pub converged: bool,
}

pub fn read_sweep_csv<R: std::io::Read>(reader: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let rows = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<SweepRow>, _>>()?;
    Ok(rows)
}

fn reference_density(theta: Option<FrankParameter>, n: usize) -> Result<CheckerboardDensity> {
    match theta {
        Some(p) => frank_checkerboard(p, n),
        None => CheckerboardDensity::uniform(n),
    }
}

fn sweep_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
}

/// Solves MICK on each grid size and compares against the Frank checkerboard
/// with `θ = theta_from_tau(tau)`. Runs are independent and execute in
/// parallel (capped by `MICK_THREADS`); a failing run is recorded without
/// aborting the others.
pub fn convergence_sweep(
    tau: f64,
    grid_sizes: &[usize],
    cfg_template: &SolverConfig,
) -> Result<SweepResult> {
    if grid_sizes.is_empty() {
        return Err(Error::InvalidConfig("no grid sizes given".into()));
    }
    if grid_sizes.windows(2).any(|w| w[0] >= w[1]) || grid_sizes[0] == 0 {
        return Err(Error::InvalidConfig(format!(
            "grid sizes must be positive and strictly ascending, got {grid_sizes:?}"
        )));
    }
    let theta = if tau == 0.0 {
        None
    } else {
        Some(theta_from_tau(tau, 1e-13)?)
    };

    let run = |&n: &usize| -> (Option<f64>, Option<SolverReport>, Option<String>) {
        let cfg = SolverConfig {
            n,
            target_tau: tau,
            ..*cfg_template
        };
        let (report, failure) = match solve_mick(&cfg) {
            Ok(r) => (Some(r), None),
            Err(Error::NoConvergence(r)) => (Some(*r), Some("NoConvergence".to_string())),
            Err(e) => (None, Some(format!("{}: {e}", e.kind()))),
        };
        let sup = report.as_ref().and_then(|r| {
            reference_density(theta, n)
                .and_then(|reference| sup_mass_difference(r.density(), &reference))
                .ok()
        });
        (sup, report, failure)
    };

    let outputs: Vec<_> = match sweep_threads() {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            pool.install(|| grid_sizes.par_iter().map(run).collect())
        }
        None => grid_sizes.par_iter().map(run).collect(),
    };

    let mut result = SweepResult {
        tau,
        theta: theta.map(FrankParameter::theta),
        grid_sizes: grid_sizes.to_vec(),
        sup_errors: Vec::with_capacity(outputs.len()),
        per_run_reports: Vec::with_capacity(outputs.len()),
        failures: Vec::with_capacity(outputs.len()),
    };
    for (sup, report, failure) in outputs {
        result.sup_errors.push(sup);
        result.per_run_reports.push(report);
        result.failures.push(failure);
    }
    Ok(result)
}
