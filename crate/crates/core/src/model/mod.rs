//! Exogenous model data: utilities, parameters, grid and measures.

pub mod grid;
pub mod measure;
pub mod params;
pub mod utility;

pub use grid::{SkillGrid, Split};
pub use measure::{
    discretize_density, doubling_check, pushforward_z, DensitySpec, Discretized, DoublingReport, GridCoupling, GridMeasure,
};
pub use params::{production_eval, z_map, Sector, TechnologyParams};
pub use utility::{validate_utility, CurveKind, UtilityCurve, UtilityReport};
