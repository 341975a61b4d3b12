//! Discretized planner's LP and its exact solver.

pub mod assemble;
pub mod duality;
pub mod simplex;
pub mod tableau;

pub use assemble::{
    assemble_from_instance, assemble_primal, eps_column, eps_index, feasible_seed, lambda_column, lambda_index, rhs_of,
    seed_basis, solve_lp, DiscreteLP, LPSolution, MAX_DENSE_N,
};
pub use duality::{duality_report, lp_certificate, DualityReport, LpCertificate};
pub use simplex::{solve_dense_form, LpStatus, Simplex, SimplexOutcome, SparseCol};
pub use tableau::{coupling_csv, from_tableau_text, parse_coupling_csv, to_rational, to_tableau_text};
