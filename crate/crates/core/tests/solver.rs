mod common;

use common::{constrained_reference, info, penalized_reference, random_feasible, sup_diff};
use mick_core::solver::stationarity;
use mick_core::{
    compare_to_frank, information, inner_fixed_point, kendall_tau_checkerboard, solve_mick,
    tau_max, Error, FrankParameter, MultiplierInit, SolverConfig, SolverState,
};

#[test]
fn matches_constrained_reference_optimizer() {
    for n in [3, 4] {
        for tau in [0.1, 0.3] {
            let report = solve_mick(&SolverConfig::new(n, tau)).unwrap();
            let reference = constrained_reference(n, tau);
            let d = sup_diff(report.density().masses(), &reference);
            assert!(d < 1e-5, "n={n} τ={tau}: {d}");
        }
    }
}

#[test]
fn minimal_information_among_random_feasible() {
    for n in [3, 4] {
        for tau in [0.1, 0.3] {
            let report = solve_mick(&SolverConfig::new(n, tau)).unwrap();
            let best = information(report.density());
            for d in random_feasible(n, tau, 1000, 42 + n as u64) {
                assert!(best <= info(&d) + 1e-12, "n={n} τ={tau}");
            }
        }
    }
}

#[test]
fn fixed_multiplier_matches_penalized_reference() {
    let cfg = SolverConfig::new(4, 0.0);
    let out = inner_fixed_point(&SolverState::uniform(4).unwrap(), 0.05, &cfg).unwrap();
    let reference = penalized_reference(4, 0.05);
    let d = sup_diff(out.state.density.masses(), &reference);
    assert!(d < 1e-6, "{d}");
    assert!(stationarity(out.state.density.masses(), 0.05).residual <= cfg.tol_fix);
}

#[test]
fn negative_tau_is_row_reversal() {
    let pos = solve_mick(&SolverConfig::new(8, 0.307)).unwrap();
    let neg = solve_mick(&SolverConfig::new(8, -0.307)).unwrap();
    let d = sup_diff(
        neg.density().masses(),
        pos.density().reverse_rows().masses(),
    );
    assert!(d < 1e-6, "{d}");
    assert!((neg.implied_theta + pos.implied_theta).abs() < 1e-4);
}

#[test]
fn solution_is_exchangeable() {
    let r = solve_mick(&SolverConfig::new(9, 0.4)).unwrap();
    let d = sup_diff(r.density().masses(), r.density().transpose().masses());
    assert!(d < 1e-9, "{d}");
}

#[test]
fn deterministic() {
    let cfg = SolverConfig::new(10, 0.25);
    assert_eq!(solve_mick(&cfg).unwrap(), solve_mick(&cfg).unwrap());
}

#[test]
fn report_is_consistent() {
    let cfg = SolverConfig::new(12, 0.307);
    let r = solve_mick(&cfg).unwrap();
    assert!(r.converged && r.monotone_trace);
    assert!((r.achieved_tau - 0.307).abs() <= cfg.tol_tau);
    assert!((kendall_tau_checkerboard(r.density()) - r.achieved_tau).abs() < 1e-15);
    assert!(r.stationarity_residual <= cfg.tol_fix);
    assert_eq!(r.implied_theta, 4.0 * r.state.multiplier);
    assert!(r.density().masses().iter().all(|&m| m > 0.0));
    assert!(r.density().max_marginal_error() <= 1e-12);
    let s = stationarity(r.density().masses(), r.state.multiplier);
    assert!(s.residual <= cfg.tol_fix);
}

#[test]
fn zero_tau_is_uniform() {
    let r = solve_mick(&SolverConfig::new(7, 0.0)).unwrap();
    assert!(r
        .density()
        .masses()
        .iter()
        .all(|&m| (m - 1.0 / 49.0).abs() < 1e-16));
    assert_eq!(r.implied_theta, 0.0);
    assert!(r.information.abs() < 1e-15);
}

#[test]
fn close_to_frank_on_moderate_grid() {
    let r = solve_mick(&SolverConfig::new(16, 0.307)).unwrap();
    let err = compare_to_frank(&r, FrankParameter::new(3.0).unwrap()).unwrap();
    assert!(err < 1e-4, "{err}");
    assert!((r.implied_theta - 3.0).abs() < 0.1);
}

#[test]
fn infeasible_targets() {
    // a single cell only carries τ = 0
    assert!(matches!(
        solve_mick(&SolverConfig::new(1, 0.1)),
        Err(Error::TauInfeasible { .. })
    ));
    for n in [2, 5] {
        let max = tau_max(n);
        let err = solve_mick(&SolverConfig::new(n, max)).unwrap_err();
        assert!(matches!(err, Error::TauInfeasible { .. }), "{err}");
        let err = solve_mick(&SolverConfig::new(n, -max)).unwrap_err();
        assert!(matches!(err, Error::TauInfeasible { .. }));
    }
}

#[test]
fn strong_dependence_still_solves() {
    let r = solve_mick(&SolverConfig::new(6, 0.75)).unwrap();
    assert!((r.achieved_tau - 0.75).abs() <= 1e-6);
    assert!(r.density().masses().iter().all(|&m| m > 0.0));
}

#[test]
fn iteration_limit_reports_best_iterate() {
    let mut cfg = SolverConfig::new(8, 0.307);
    cfg.max_outer = 1;
    cfg.multiplier_init = MultiplierInit::Value(0.01);
    match solve_mick(&cfg) {
        Err(Error::NoConvergence(r)) => {
            assert!(!r.converged);
            assert_eq!(r.search_trace.len(), 1);
        }
        other => panic!("expected NoConvergence, got {other:?}"),
    }
}

#[test]
fn rejects_bad_config() {
    let mut cfg = SolverConfig::new(8, 0.3);
    cfg.tol_tau = -1.0;
    assert!(matches!(solve_mick(&cfg), Err(Error::InvalidConfig(_))));
    assert!(matches!(
        solve_mick(&SolverConfig::new(8, 1.0)),
        Err(Error::InvalidConfig(_))
    ));
}

#[test]
fn coarse_grid_multiplier_within_a_quarter() {
    let r = solve_mick(&SolverConfig::new(8, 0.307)).unwrap();
    assert!((r.implied_theta - 3.0).abs() < 0.75, "{}", r.implied_theta);
    assert!(r.state.multiplier > 0.7 && r.state.multiplier < 0.85);
}
