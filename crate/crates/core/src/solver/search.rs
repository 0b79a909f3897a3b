use serde::{Deserialize, Serialize};

use super::{inner_fixed_point, MultiplierInit, SolverConfig, SolverState};
use crate::concordance::kendall_tau_checkerboard;
use crate::copula::theta_from_tau;
use crate::error::{Error, Result};

/// One evaluation of the map `λ_d ↦ τ` during the outer search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchPoint {
    pub multiplier: f64,
    pub tau: f64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub state: SolverState,
    pub achieved_tau: f64,
    pub stationarity_residual: f64,
    pub outer_iterations: usize,
    pub inner_iterations_total: usize,
    pub converged: bool,
    pub trace: Vec<SearchPoint>,
}

/// Largest multiplier magnitude the search will try.
const MAX_MULTIPLIER: f64 = 1e6;

pub(crate) fn is_monotone(trace: &[SearchPoint]) -> bool {
    let mut pts = trace.to_vec();
    pts.sort_by(|a, b| a.multiplier.total_cmp(&b.multiplier));
    pts.windows(2).all(|w| w[1].tau >= w[0].tau)
}

/// Finds `λ_d` whose inner fixed point has Kendall's tau within `tol_tau` of
/// the target.
///
/// `g(λ) = τ(λ) − target` is treated as increasing with the exact anchor
/// `g(0) = −target` (the uniform density). Secant steps are used while they
/// stay inside the current bracket, bisection otherwise, and the bracket is
/// grown geometrically until it straddles the target. A multiplier at which
/// the inner loop fails becomes a ceiling for later candidates. Each inner
/// solve is warm-started from the previous successful one.
///
/// Returns `converged = false` (with the best iterate) when `max_outer`
/// evaluations are used up after the target was bracketed.
pub fn outer_multiplier_search(cfg: &SolverConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let target = cfg.target_tau;
    let mut state = SolverState::uniform(cfg.n)?;

    if target == 0.0 {
        let out = inner_fixed_point(&state, 0.0, cfg)?;
        return Ok(SearchOutcome {
            achieved_tau: kendall_tau_checkerboard(&out.state.density),
            stationarity_residual: out.residual,
            state: out.state,
            outer_iterations: 0,
            inner_iterations_total: out.iterations,
            converged: true,
            trace: vec![SearchPoint {
                multiplier: 0.0,
                tau: 0.0,
            }],
        });
    }

    let sign = target.signum();
    let mut lambda = match cfg.multiplier_init {
        MultiplierInit::Auto => theta_from_tau(target, 1e-12)?.theta() / 4.0,
        MultiplierInit::Value(v) if v != 0.0 => v,
        MultiplierInit::Value(_) => sign * 1e-3,
    };

    // Bracket endpoints in terms of g: `below` has g < 0, `above` has g > 0.
    let mut below: Option<(f64, f64)> = None;
    let mut above: Option<(f64, f64)> = None;
    if sign > 0.0 {
        below = Some((0.0, -target));
    } else {
        above = Some((0.0, -target));
    }
    // Failed inner solves cap the search on that side.
    let mut ceiling: Option<f64> = None;
    let mut previous: (f64, f64) = (0.0, -target);
    let mut trace = Vec::new();
    let mut inner_total = 0;
    let mut best: Option<(f64, SolverState, f64, f64)> = None;

    for outer in 1..=cfg.max_outer {
        let evaluated = inner_fixed_point(&state, lambda, cfg);
        let out = match evaluated {
            Ok(out) => out,
            Err(e @ (Error::DivergenceDetected(_) | Error::SinkhornNotConverged { .. })) => {
                let anchor = if sign > 0.0 { below } else { above }
                    .map(|p| p.0)
                    .unwrap_or(0.0);
                if (lambda - anchor).abs() < 1e-12 {
                    return Err(e);
                }
                ceiling = Some(lambda);
                lambda = 0.5 * (anchor + lambda);
                continue;
            }
            Err(e) => return Err(e),
        };
        inner_total += out.iterations;
        let tau = kendall_tau_checkerboard(&out.state.density);
        let g = tau - target;
        trace.push(SearchPoint {
            multiplier: lambda,
            tau,
        });

        let better = best.as_ref().is_none_or(|b| g.abs() < b.2.abs());
        if better {
            best = Some((lambda, out.state.clone(), g, out.residual));
        }
        if g.abs() <= cfg.tol_tau {
            return Ok(SearchOutcome {
                achieved_tau: tau,
                stationarity_residual: out.residual,
                state: out.state,
                outer_iterations: outer,
                inner_iterations_total: inner_total,
                converged: true,
                trace,
            });
        }
        state = out.state;

        if g < 0.0 {
            below = Some((lambda, g));
        } else {
            above = Some((lambda, g));
        }

        let secant = {
            let (l0, g0) = previous;
            if g != g0 {
                Some(lambda - g * (lambda - l0) / (g - g0))
            } else {
                None
            }
        };
        previous = (lambda, g);

        lambda = match (below, above) {
            (Some((lo, _)), Some((hi, _))) => match secant {
                Some(s) if s > lo.min(hi) && s < lo.max(hi) => s,
                _ => 0.5 * (lo + hi),
            },
            (Some((lo, _)), None) | (None, Some((lo, _))) => {
                // only one side known: step outward, at most 4x, below any ceiling
                let outward = |x: f64| sign * x > sign * lo;
                let far = if lo == 0.0 { 4.0 * lambda } else { 4.0 * lo };
                let mut next = match secant {
                    Some(s) if outward(s) => {
                        if sign * s > sign * far {
                            far
                        } else {
                            s
                        }
                    }
                    _ => 2.0 * lo,
                };
                if let Some(c) = ceiling {
                    if sign * next >= sign * c {
                        next = 0.5 * (lo + c);
                    }
                }
                if next.abs() > MAX_MULTIPLIER {
                    let taus = trace.iter().map(|p| p.tau);
                    return Err(Error::BracketFailure {
                        target,
                        tau_lo: taus.clone().fold(0.0, f64::min),
                        tau_hi: taus.fold(0.0, f64::max),
                    });
                }
                next
            }
            (None, None) => unreachable!("the zero-multiplier anchor is always present"),
        };
    }

    let (multiplier, state, g, residual) = match best {
        Some(b) => b,
        None => {
            return Err(Error::DivergenceDetected(
                "no multiplier produced a converged inner solve".into(),
            ))
        }
    };
    debug_assert_eq!(multiplier, state.multiplier);
    Ok(SearchOutcome {
        achieved_tau: target + g,
        stationarity_residual: residual,
        state,
        outer_iterations: cfg.max_outer,
        inner_iterations_total: inner_total,
        converged: false,
        trace,
    })
}
