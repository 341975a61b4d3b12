use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter {name} = {value} violates {bound}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },
    #[error("skill {value} outside [0, {top}]")]
    OutOfDomain { value: f64, top: f64 },
    #[error("density rejected: {0}")]
    InvalidDensity(String),
    #[error("utility curve rejected: {0}")]
    InvalidCurve(String),
    #[error("grid mismatch: expected {expected} nodes, got {got}")]
    GridMismatch { expected: usize, got: usize },
    #[error("input wage array is not non-decreasing at node {node}")]
    NonMonotone { node: usize },
    #[error("non-finite value in {what} at node {node}")]
    Overflow { what: &'static str, node: usize },
    #[error("grid of {n} nodes exceeds the dense LP limit {limit}; use the wage solver path")]
    TooLarge { n: usize, limit: usize },
    #[error("coupling is not positive assortative ({violations} violating pairs); run assortativity_check")]
    NotAssortative { violations: usize },
    #[error("population {population} admits no integral hierarchy; nearest admissible: {below:?} and {above}")]
    Inadmissible {
        population: u64,
        below: Option<u64>,
        above: u64,
    },
    #[error("analysis declined: {0}")]
    Declined(String),
    #[error("malformed LP tableau: {0}")]
    Tableau(String),
}

pub type Result<T> = std::result::Result<T, Error>;
