//! Post-processing of equilibrium couplings.

pub mod assortativity;
pub mod density;
pub mod occupations;
pub mod specialization;
pub mod teacher_map;
pub mod uniqueness;

pub use assortativity::{assortativity_check, AssortativityReport, WEIGHT_FLOOR};
pub use density::{adult_density, dyadic_windows, tail_window, DensityReport, TailWindow, DENSITY_TOL};
pub use occupations::{occupation_split, predicted_masses, Masses, OccupationSplit};
pub use specialization::{hypotheses, specialization_report, Hypotheses, Hypothesis, Ordering, Orderings, SpecializationReport};
pub use teacher_map::{teacher_map_extract, window_slope, TeacherMap};
pub use uniqueness::{total_variation, uniqueness_probe, ProbeReport, PROBE_TV_LIMIT};
