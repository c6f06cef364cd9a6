//! Deterministic solvers for the distribution of squared localization
//! lengths: the steady state, the transient from an initial profile, and
//! checks of both against the integral forms they come from.

mod config;
mod resummed;
mod steady;
mod transient;

pub use config::SolverConfig;
pub use resummed::{pm_recursion, residual_resummed, ResummedResidual, MAX_ORDER};
pub use steady::{
    residual_curve, residual_steady, residual_steady_with, solve_steady, solve_steady_from,
    solve_steady_report, SteadyReport,
};
pub use transient::{evolve_transient, TransientSolution};
