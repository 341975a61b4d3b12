//! Stability residuals `f`, `g` and the node-wise stability bounds.

use serde::Serialize;

use crate::error::Result;
use crate::instance::Instance;
use crate::model::{SkillGrid, TechnologyParams};
use crate::scalar::{to_f64, Real};
use crate::wages::envelope::technology;
use crate::wages::solver::WageProfile;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub min_f: f64,
    /// `(a, k)` attaining `min_f`.
    pub min_f_at: (usize, usize),
    pub min_g: f64,
    /// `(k', k)` attaining `min_g`.
    pub min_g_at: (usize, usize),
    /// `min_k v(k) - N'/(N'+1) b_L(k)`.
    pub lower_bound_slack: f64,
    pub lower_bound_at: usize,
    /// `min_a N/(N-1) (u(a) - c b_E(a)) - v(a)`; absent when `N = 1`.
    pub upper_bound_slack: Option<f64>,
    pub upper_bound_at: Option<usize>,
}

impl StabilityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_f >= -tol
            && self.min_g >= -tol
            && self.lower_bound_slack >= -tol
            && self.upper_bound_slack.map_or(true, |s| s >= -tol)
    }
}

pub(crate) fn residuals_on<T: Real>(inst: &Instance<T>, u: &[T], v: &[T]) -> StabilityReport {
    let n = inst.n();
    let p = &inst.params;
    let (mut min_f, mut min_f_at) = (T::infinity(), (0, 0));
    let (mut min_g, mut min_g_at) = (T::infinity(), (0, 0));
    for a in 0..n {
        for k in 0..n {
            let f = inst.f(u, v, a, k);
            if f < min_f {
                min_f = f;
                min_f_at = (a, k);
            }
            let g = inst.g(v, a, k);
            if g < min_g {
                min_g = g;
                min_g_at = (a, k);
            }
        }
    }
    let floor = p.n_workers / (p.n_workers + T::one());
    let (mut lo, mut lo_at) = (T::infinity(), 0);
    for k in 0..n {
        let s = v[k] - floor * p.b_l.value(inst.grid.node(k));
        if s < lo {
            lo = s;
            lo_at = k;
        }
    }
    let (upper, upper_at) = if p.n_students > T::one() {
        let r = p.n_students / (p.n_students - T::one());
        let (mut hi, mut at) = (T::infinity(), 0);
        for a in 0..n {
            let s = r * (u[a] - inst.edu(a, a)) - v[a];
            if s < hi {
                hi = s;
                at = a;
            }
        }
        (Some(to_f64(&hi)), Some(at))
    } else {
        (None, None)
    };
    StabilityReport {
        min_f: to_f64(&min_f),
        min_f_at,
        min_g: to_f64(&min_g),
        min_g_at,
        lower_bound_slack: to_f64(&lo),
        lower_bound_at: lo_at,
        upper_bound_slack: upper,
        upper_bound_at: upper_at,
    }
}

/// Residuals of `profile` using its own education weight.
pub fn stability_residuals<T: Real>(
    profile: &WageProfile<T>,
    params: &TechnologyParams<T>,
    grid: &SkillGrid<T>,
) -> Result<StabilityReport> {
    grid.check_len(profile.v.len())?;
    grid.check_len(profile.u.len())?;
    let inst = technology(params, grid, profile.c_eff)?;
    Ok(residuals_on(&inst, &profile.u, &profile.v))
}
