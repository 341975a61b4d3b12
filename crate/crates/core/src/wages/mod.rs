//! Minimizing wages via the envelope characterization.

pub mod envelope;
pub mod residuals;
pub mod solver;

pub use envelope::{bellman_step, convexify, envelope, wage_components, Components};
pub use residuals::{stability_residuals, StabilityReport};
pub use solver::{
    delta_continuation, solve_equilibrium, solve_instance, solve_wages, Continuation, Equilibrium, SolveStats,
    SolverConfig, WageProfile,
};
