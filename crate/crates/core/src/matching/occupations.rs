use serde::Serialize;

use crate::model::{pushforward_z, GridCoupling, GridMeasure, SkillGrid, TechnologyParams};
use crate::scalar::{lit, to_f64, Real};

/// Occupational decomposition of adults.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationSplit<T> {
    /// `λ¹`
    pub kappa_w: GridMeasure<T>,
    /// `λ² / N'`
    pub kappa_m: GridMeasure<T>,
    /// `ε² / N`
    pub kappa_t: GridMeasure<T>,
    /// `z_# ε`
    pub kappa: GridMeasure<T>,
    /// Student marginal `ε¹`.
    pub students: GridMeasure<T>,
    /// Sup-norm of `κ_w + κ_m + κ_t - κ - δ/n`.
    pub residual: T,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Masses {
    pub workers: f64,
    pub managers: f64,
    pub teachers: f64,
    pub adults: f64,
}

impl<T: Real> OccupationSplit<T> {
    pub fn masses(&self) -> Masses {
        Masses {
            workers: to_f64(&self.kappa_w.mass),
            managers: to_f64(&self.kappa_m.mass),
            teachers: to_f64(&self.kappa_t.mass),
            adults: to_f64(&self.kappa.mass),
        }
    }

    /// Labor mass `κ_w + κ_m` at node `i`.
    pub fn labor_at(&self, i: usize) -> T {
        self.kappa_w.weights[i] + self.kappa_m.weights[i]
    }

    /// Highest node carrying labor mass above `floor`.
    pub fn top_labor_node(&self, floor: T) -> Option<usize> {
        (0..self.kappa.len()).rev().find(|&i| self.labor_at(i) > floor)
    }
}

/// Closed-form occupation masses at `δ = 0`: workers, managers, teachers.
pub fn predicted_masses<T: Real>(params: &TechnologyParams<T>) -> (T, T, T) {
    let (n, np, one) = (params.n_students, params.n_workers, T::one());
    let w = (n - one) * np / (n * (np + one));
    let m = (n - one) / (n * (np + one));
    (w, m, one / n)
}

/// Splits adults into workers, managers and teachers and checks the
/// steady-state identity with perturbation `delta`.
pub fn occupation_split<T: Real>(
    eps: &GridCoupling<T>,
    lambda: &GridCoupling<T>,
    params: &TechnologyParams<T>,
    grid: &SkillGrid<T>,
    delta: T,
) -> OccupationSplit<T> {
    let kappa_w = lambda.row_marginal();
    let kappa_m = lambda.col_marginal().scaled(T::one() / params.n_workers);
    let kappa_t = eps.col_marginal().scaled(T::one() / params.n_students);
    let kappa = pushforward_z(eps, params, grid);
    let d = delta / T::from_usize(grid.n).unwrap();
    let residual = (0..grid.n).fold(T::zero(), |m, i| {
        let r = kappa_w.weights[i] + kappa_m.weights[i] + kappa_t.weights[i] - kappa.weights[i] - d;
        m.max(r.abs())
    });
    OccupationSplit {
        kappa_w,
        kappa_m,
        kappa_t,
        kappa,
        students: eps.row_marginal(),
        residual,
        consistent: residual <= lit(1e-9),
    }
}
