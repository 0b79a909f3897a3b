//! Command-line front end (`frankmick`).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::concordance::{frank_f, frank_f_identity, liouville_residual};
use crate::copula::{
    frank_cdf, frank_checkerboard, frank_density, frank_sample, tau_from_theta, theta_from_tau,
    FrankParameter,
};
use crate::error::Error;
use crate::harness::{compare_to_frank, convergence_sweep, sweep_svg, DEFAULT_GRIDS};
use crate::solver::{solve_mick, SolverConfig, SolverReport};

#[derive(Debug, Parser)]
#[command(
    name = "frankmick",
    version,
    about = "Frank copula and minimum-information copula under fixed Kendall's tau"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form Frank copula tools.
    #[command(subcommand)]
    Frank(FrankCommand),
    /// Minimum-information copula solver.
    #[command(subcommand)]
    Mick(MickCommand),
    /// Numerical identity checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Subcommand)]
enum FrankCommand {
    /// Evaluate the cdf (default) or density at (u, v).
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        u: f64,
        #[arg(long)]
        v: f64,
        #[arg(long, conflicts_with = "pdf")]
        cdf: bool,
        #[arg(long)]
        pdf: bool,
    },
    /// Kendall's tau for a Frank parameter.
    Tau {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 3)]
        digits: usize,
    },
    /// Frank parameter for a Kendall's tau.
    Theta {
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 6)]
        digits: usize,
    },
    /// Write the checkerboard approximation (.json or .csv).
    Checkerboard {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a reproducible sample as CSV with header `u,v`.
    Sample {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Tolerances {
    #[arg(long = "tol-tau")]
    tol_tau: Option<f64>,
    #[arg(long = "tol-fix")]
    tol_fix: Option<f64>,
    #[arg(long)]
    damping: Option<f64>,
    #[arg(long = "max-outer")]
    max_outer: Option<usize>,
    #[arg(long = "max-inner")]
    max_inner: Option<usize>,
}

impl Tolerances {
    fn apply(&self, mut cfg: SolverConfig) -> SolverConfig {
        if let Some(x) = self.tol_tau {
            cfg.tol_tau = x;
        }
        if let Some(x) = self.tol_fix {
            cfg.tol_fix = x;
        }
        if let Some(x) = self.damping {
            cfg.damping = x;
        }
        if let Some(x) = self.max_outer {
            cfg.max_outer = x;
        }
        if let Some(x) = self.max_inner {
            cfg.max_inner = x;
        }
        cfg
    }
}

#[derive(Debug, Subcommand)]
enum MickCommand {
    /// Solve on an n×n grid and write the JSON report.
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        tolerances: Tolerances,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sup-norm cell-mass difference between a report and a Frank checkerboard.
    Compare {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
    },
    /// Convergence sweep over grid sizes.
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_GRIDS)]
        grids: Vec<usize>,
        #[command(flatten)]
        tolerances: Tolerances,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Linear instead of logarithmic y-axis in the SVG.
        #[arg(long)]
        linear_y: bool,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Finite-difference residual of ∂²/∂u∂v log c = 2θ c at n and 2n.
    Liouville {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Optional CSV export of the residual grid at n.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// cdf vs −(1/θ) ln F on the node grid.
    Identity {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 50)]
        n: usize,
    },
}

/// Runs the CLI and returns the process exit code: 0 on success, 2 on usage
/// errors, 1 on numerical failures (with a JSON diagnostic on stderr).
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli.command, &mut out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            1
        }
        Err(Failure::Check(value)) => {
            eprintln!("{value}");
            1
        }
    }
}

enum Failure {
    Usage(String),
    Numeric(Error),
    Check(serde_json::Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::InvalidConfig(_) => Failure::Usage(e.to_string()),
            other => Failure::Numeric(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(e.into())
    }
}

fn param(theta: f64) -> std::result::Result<FrankParameter, Failure> {
    Ok(FrankParameter::new(theta)?)
}

fn unit(name: &str, x: f64) -> std::result::Result<(), Failure> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "--{name} must lie in [0, 1], got {x}"
        )))
    }
}

fn check_extension(path: &Path, allowed: &[&str]) -> std::result::Result<(), Failure> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext {
        Some(e) if allowed.contains(&e.as_str()) => Ok(()),
        _ => Err(Failure::Usage(format!(
            "{} must have extension {}",
            path.display(),
            allowed.join(" or ")
        ))),
    }
}

fn run(command: Command, out: &mut impl Write) -> std::result::Result<(), Failure> {
    match command {
        Command::Frank(cmd) => run_frank(cmd, out),
        Command::Mick(cmd) => run_mick(cmd, out),
        Command::Verify(cmd) => run_verify(cmd, out),
    }
}

fn run_frank(cmd: FrankCommand, out: &mut impl Write) -> std::result::Result<(), Failure> {
    match cmd {
        FrankCommand::Eval {
            theta,
            u,
            v,
            cdf: _,
            pdf,
        } => {
            let p = param(theta)?;
            unit("u", u)?;
            unit("v", v)?;
            let value = if pdf {
                frank_density(p, u, v)
            } else {
                frank_cdf(p, u, v)
            };
            writeln!(out, "{value}")?;
        }
        FrankCommand::Tau { theta, digits } => {
            let tau = tau_from_theta(param(theta)?);
            writeln!(out, "{tau:.digits$}")?;
        }
        FrankCommand::Theta { tau, tol, digits } => {
            let p = theta_from_tau(tau, tol).map_err(|e| match e {
                Error::Domain { .. } => Failure::Usage(e.to_string()),
                other => Failure::Numeric(other),
            })?;
            writeln!(out, "{:.digits$}", p.theta())?;
        }
        FrankCommand::Checkerboard {
            theta,
            n,
            out: path,
        } => {
            check_extension(&path, &["json", "csv"])?;
            if n == 0 {
                return Err(Failure::Usage("--n must be positive".into()));
            }
            let c = frank_checkerboard(param(theta)?, n)?;
            c.save(&path)?;
            writeln!(out, "wrote {}x{} checkerboard to {}", n, n, path.display())?;
        }
        FrankCommand::Sample {
            theta,
            count,
            seed,
            out: path,
        } => {
            check_extension(&path, &["csv"])?;
            if count == 0 {
                return Err(Failure::Usage("--count must be positive".into()));
            }
            let pairs = frank_sample(param(theta)?, count, seed);
            let mut w = csv::Writer::from_path(&path).map_err(Error::from)?;
            w.write_record(["u", "v"]).map_err(Error::from)?;
            for (u, v) in pairs {
                w.write_record(&[u.to_string(), v.to_string()])
                    .map_err(Error::from)?;
            }
            w.flush()?;
            writeln!(out, "wrote {count} pairs to {}", path.display())?;
        }
    }
    Ok(())
}

fn run_mick(cmd: MickCommand, out: &mut impl Write) -> std::result::Result<(), Failure> {
    match cmd {
        MickCommand::Solve {
            tau,
            n,
            tolerances,
            out: path,
        } => {
            check_extension(&path, &["json"])?;
            let cfg = tolerances.apply(SolverConfig::new(n, tau));
            cfg.validate()?;
            match solve_mick(&cfg) {
                Ok(report) => {
                    std::fs::write(&path, report.to_json()?)?;
                    writeln!(
                        out,
                        "{}",
                        json!({
                            "n": n,
                            "achieved_tau": report.achieved_tau,
                            "multiplier": report.state.multiplier,
                            "implied_theta": report.implied_theta,
                            "stationarity_residual": report.stationarity_residual,
                            "outer_iterations": report.outer_iterations,
                            "inner_iterations_total": report.inner_iterations_total,
                            "converged": report.converged,
                            "out": path.display().to_string(),
                        })
                    )?;
                }
                Err(Error::NoConvergence(report)) => {
                    std::fs::write(&path, report.to_json()?)?;
                    return Err(Failure::Numeric(Error::NoConvergence(report)));
                }
                Err(e) => return Err(e.into()),
            }
        }
        MickCommand::Compare { report, theta } => {
            let p = param(theta)?;
            let text = std::fs::read_to_string(&report)?;
            let report = SolverReport::from_json(&text)?;
            let sup = compare_to_frank(&report, p)?;
            writeln!(out, "{sup:e}")?;
        }
        MickCommand::Sweep {
            tau,
            grids,
            tolerances,
            out: path,
            svg,
            linear_y,
        } => {
            check_extension(&path, &["csv"])?;
            if let Some(s) = &svg {
                check_extension(s, &["svg"])?;
            }
            let template =
                tolerances.apply(SolverConfig::new(grids.first().copied().unwrap_or(1), tau));
            template.validate()?;
            let result = convergence_sweep(tau, &grids, &template)?;
            result.write_csv(std::fs::File::create(&path)?)?;
            if let Some(s) = &svg {
                std::fs::write(s, sweep_svg(&result, !linear_y))?;
            }
            for (k, &n) in result.grid_sizes.iter().enumerate() {
                let err = result.sup_errors[k].map_or("NaN".to_string(), |e| format!("{e:e}"));
                writeln!(out, "n={n} sup_error={err}")?;
            }
            if let Some((k, msg)) = result
                .failures
                .iter()
                .enumerate()
                .find_map(|(k, f)| f.as_ref().map(|m| (k, m)))
            {
                return Err(Failure::Check(json!({
                    "error": "SweepIncomplete",
                    "message": format!("run n={} failed: {msg}", result.grid_sizes[k]),
                })));
            }
        }
    }
    Ok(())
}

/// Acceptance ratio for the O(h²) check when the grid is refined 2x.
const LIOUVILLE_MAX_RATIO: f64 = 1.0 / 3.0;
const IDENTITY_TOLERANCE: f64 = 1e-12;

fn run_verify(cmd: VerifyCommand, out: &mut impl Write) -> std::result::Result<(), Failure> {
    match cmd {
        VerifyCommand::Liouville {
            theta,
            n,
            out: path,
        } => {
            let p = param(theta)?;
            if n < 8 {
                return Err(Failure::Usage("--n must be at least 8".into()));
            }
            let density = |u, v| frank_density(p, u, v);
            let coarse = liouville_residual(density, 2.0 * theta, n)?;
            let fine = liouville_residual(density, 2.0 * theta, 2 * n)?;
            if let Some(path) = path {
                coarse.write_csv(std::fs::File::create(path)?, true)?;
            }
            let (a, b) = (coarse.sup_abs_interior(), fine.sup_abs_interior());
            let ratio = b / a;
            let pass = ratio <= LIOUVILLE_MAX_RATIO;
            let summary = json!({
                "theta": theta,
                "n": n,
                "constant": 2.0 * theta,
                "sup_residual": a,
                "sup_residual_2n": b,
                "ratio": ratio,
                "pass": pass,
            });
            writeln!(out, "{summary}")?;
            if !pass {
                return Err(Failure::Check(summary));
            }
        }
        VerifyCommand::Identity { theta, n } => {
            let p = param(theta)?;
            let sup = frank_f_identity(p, n.max(2));
            let pass = sup <= IDENTITY_TOLERANCE;
            let summary = json!({
                "theta": theta,
                "n": n.max(2),
                "sup_deviation": sup,
                "f_00": frank_f(p, 0.0, 0.0),
                "f_11": frank_f(p, 1.0, 1.0),
                "exp_neg_theta": (-theta).exp(),
                "pass": pass,
            });
            writeln!(out, "{summary}")?;
            if !pass {
                return Err(Failure::Check(summary));
            }
        }
    }
    Ok(())
}
