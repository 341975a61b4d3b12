//! Educational pyramid.

pub mod census;
pub mod chain;
pub mod phase;

pub use census::{guru_census, nearest_admissible, Apex, CensusLevel, GuruHierarchy};
pub use chain::{descendant_chain, gradient_bound, gradient_bound_with, ChainEnd, DescendantChain};
pub use phase::{
    phase_fit, predicted_density_ratio, predicted_exponent, predicted_limit_slope, top_slopes, ExponentFit,
    GradientPoint, PhaseFlags, PhaseReport, Regime, TopSlopes, DENSITY_WINDOW, MIN_FIT_NODES,
};
