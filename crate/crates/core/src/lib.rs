//! Frank copula family and the minimum-information copula under fixed
//! Kendall's tau (MICK) on checkerboard grids.
//!
//! * [`copula`]: closed-form Frank cdf, density, generator, sampling,
//!   checkerboard discretization and the Debye-function tau/theta bridge.
//! * [`checkerboard`]: the discrete copula representation and its I/O.
//! * [`concordance`]: Kendall's tau functionals, the concordance potential and
//!   local-dependence residual checks.
//! * [`solver`]: the discrete MICK solver.
//! * [`harness`]: MICK vs Frank comparisons and grid-size sweeps.

pub mod checkerboard;
pub mod cli;
pub mod concordance;
pub mod copula;
pub mod error;
pub mod harness;
pub mod solver;

pub use checkerboard::{
    checkerboard_cdf_eval, sup_mass_difference, CheckerboardCdf, CheckerboardDensity, DensityMeta,
    GridFunction,
};
pub use concordance::{
    concordance_potential, frank_f, frank_f_identity, kendall_tau_checkerboard, kendall_tau_sample,
    liouville_residual, ConcordancePotential,
};
pub use copula::{
    debye_d1, frank_cdf, frank_checkerboard, frank_density, frank_generator,
    frank_generator_inverse, frank_sample, tau_from_theta, theta_from_tau, FrankParameter,
};
pub use error::{Error, Result};
pub use harness::{compare_to_frank, convergence_sweep, SweepResult};
pub use solver::{
    information, inner_fixed_point, outer_multiplier_search, sinkhorn_project, solve_mick, tau_max,
    MultiplierInit, SolverConfig, SolverReport, SolverState,
};
