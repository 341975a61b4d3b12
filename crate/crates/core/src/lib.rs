//! Steady-state education and labor matching: discretized planner's LP,
//! minimizing wages, matching analysis and the educational pyramid.
//!
//! Everything numeric is generic over the scalar; the aliases below fix
//! it to `f64`.

pub mod error;
pub mod instance;
pub mod lp;
pub mod matching;
pub mod model;
pub mod pyramid;
pub mod scalar;
pub mod wages;

pub use error::{Error, Result};
pub use scalar::{LpScalar, Real};

pub type Params = model::TechnologyParams<f64>;
pub type Curve = model::UtilityCurve<f64>;
pub type Grid = model::SkillGrid<f64>;
pub type Measure = model::GridMeasure<f64>;
pub type Coupling = model::GridCoupling<f64>;
pub type Density = model::DensitySpec<f64>;
pub type Lp = lp::DiscreteLP<f64>;
pub type LpSolution = lp::LPSolution<f64>;
pub type Profile = wages::WageProfile<f64>;
pub type Config = wages::SolverConfig<f64>;
pub type Equilibrium = wages::Equilibrium<f64>;
pub type Economy = instance::Instance<f64>;
