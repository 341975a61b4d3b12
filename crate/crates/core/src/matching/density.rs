use serde::Serialize;

use crate::matching::occupations::OccupationSplit;
use crate::model::{SkillGrid, TechnologyParams};
use crate::scalar::{lit, to_f64, Real};

/// Slack allowed on the sup-norm density bound.
pub const DENSITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailWindow {
    /// Adult window length `Δ`.
    pub delta: f64,
    /// `κ[k̄-Δ, k̄]`
    pub adults: f64,
    /// `α[ā-Δ/(1-θ), ā]`
    pub students: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    /// `κ` per node divided by `h`.
    pub kappa_density: Vec<f64>,
    /// Student marginal per node divided by `h`.
    pub student_density: Vec<f64>,
    pub sup_kappa: f64,
    pub sup_students: f64,
    /// `sup_students / (1-θ)`
    pub sup_bound: f64,
    pub sup_holds: bool,
    pub tail: Vec<TailWindow>,
    pub tail_holds: bool,
}

/// Compares adult mass near the top with student mass over the stretched
/// window. Cells are `[x_i, x_i + h)`, so the top of both supports is `k̄`.
pub fn tail_window<T: Real>(split: &OccupationSplit<T>, theta: T, grid: &SkillGrid<T>, delta: T) -> TailWindow {
    let adults = split.kappa.top_window(grid, delta);
    let stretched = (delta / (T::one() - theta)).min(grid.k_top);
    let students = split.students.top_window(grid, stretched);
    let slack = lit::<T>(1e-12) * split.students.mass.max(T::one());
    TailWindow {
        delta: to_f64(&delta),
        adults: to_f64(&adults),
        students: to_f64(&students),
        holds: adults <= students + slack,
    }
}

/// Dyadic window lengths `k̄/2^j` down to one cell.
pub fn dyadic_windows<T: Real>(grid: &SkillGrid<T>) -> Vec<T> {
    let mut out = Vec::new();
    let mut d = grid.k_top;
    let two = lit::<T>(2.0);
    while d >= grid.h * (T::one() - lit(1e-12)) {
        out.push(d);
        d = d / two;
    }
    out
}

/// Adult density and its bounds in terms of the student density. The student
/// marginal `ε¹ = α + δ/n` stands in for `α`, which it equals at `δ = 0`.
pub fn adult_density<T: Real>(split: &OccupationSplit<T>, params: &TechnologyParams<T>, grid: &SkillGrid<T>) -> DensityReport {
    let h = to_f64(&grid.h);
    let kappa_density: Vec<f64> = split.kappa.weights.iter().map(|w| to_f64(w) / h).collect();
    let student_density: Vec<f64> = split.students.weights.iter().map(|w| to_f64(w) / h).collect();
    let sup = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let sup_kappa = sup(&kappa_density);
    let sup_students = sup(&student_density);
    let sup_bound = sup_students / (1.0 - to_f64(&params.theta));
    let tail: Vec<TailWindow> = dyadic_windows(grid)
        .into_iter()
        .map(|d| tail_window(split, params.theta, grid, d))
        .collect();
    DensityReport {
        sup_holds: sup_kappa <= sup_bound + DENSITY_TOL,
        tail_holds: tail.iter().all(|t| t.holds),
        kappa_density,
        student_density,
        sup_kappa,
        sup_students,
        sup_bound,
        tail,
    }
}
