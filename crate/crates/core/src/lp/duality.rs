//! Cross-certification of an LP solution against a wage profile.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::assemble::{DiscreteLP, LPSolution};
use crate::model::{pushforward_z, SkillGrid, TechnologyParams};
use crate::scalar::{to_f64, LpScalar, Real};
use crate::wages::envelope::technology;
use crate::wages::solver::WageProfile;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub lp_value: f64,
    pub wage_objective: f64,
    /// `|LP value - (α(u) + δ⟨u+v⟩)|`.
    pub gap: f64,
    /// `ε(f)` with the profile's `(u, v)`.
    pub eps_f: f64,
    /// `λ(g)` with the profile's `(u, v)`.
    pub lambda_g: f64,
    /// Sup distance between LP multipliers and the profile over all nodes.
    /// Multipliers are per unit of mass already, so no rescaling applies.
    pub dual_distance_u: f64,
    pub dual_distance_v: f64,
    /// Same distances restricted to student nodes with mass and to adult
    /// nodes reached by `z_#ε`.
    pub support_distance_u: f64,
    pub support_distance_v: f64,
}

/// Gap, slackness and multiplier distance between `solution` and `profile`.
pub fn duality_report<T: Real>(
    solution: &LPSolution<T>,
    profile: &WageProfile<T>,
    params: &TechnologyParams<T>,
    grid: &SkillGrid<T>,
) -> Result<DualityReport> {
    if solution.n != grid.n {
        return Err(Error::GridMismatch { expected: grid.n, got: solution.n });
    }
    grid.check_len(profile.v.len())?;
    let inst = technology(params, grid, profile.c_eff)?;
    let (u, v) = (&profile.u, &profile.v);
    let eps_f = solution.eps.integrate(|a, k| inst.f(u, v, a, k));
    let lambda_g = solution.lambda.integrate(|i, j| inst.g(v, i, j));
    let floor = crate::scalar::lit::<T>(1e-12);
    let students = solution.eps.row_marginal();
    let adults = pushforward_z(&solution.eps, params, grid);
    let dist = |a: &[T], b: &[T], keep: &dyn Fn(usize) -> bool| {
        (0..a.len()).filter(|&i| keep(i)).fold(0.0f64, |m, i| m.max(to_f64(&(a[i] - b[i]).abs())))
    };
    Ok(DualityReport {
        lp_value: to_f64(&solution.value),
        wage_objective: to_f64(&profile.objective),
        gap: to_f64(&(solution.value - profile.objective).abs()),
        eps_f: to_f64(&eps_f),
        lambda_g: to_f64(&lambda_g),
        dual_distance_u: dist(solution.u(), u, &|_| true),
        dual_distance_v: dist(solution.v(), v, &|_| true),
        support_distance_u: dist(solution.u(), u, &|i| students.weights[i] > floor),
        support_distance_v: dist(solution.v(), v, &|i| adults.weights[i] > floor),
    })
}

/// Self-certificate of an LP's own primal/dual pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpCertificate {
    /// Sup-norm of `A x - b`.
    pub primal_residual: f64,
    /// `|c·x - b·y|`.
    pub duality_gap: f64,
    /// `Σ x_j (A_j·y - c_j)`.
    pub slackness: f64,
    /// Most negative `A_j·y - c_j`.
    pub min_dual_slack: f64,
    pub min_primal: f64,
}

pub fn lp_certificate<T: LpScalar>(lp: &DiscreteLP<T>, sol: &LPSolution<T>) -> LpCertificate {
    let res = lp.residual(&sol.x);
    let slacks = lp.dual_slacks(&sol.dual);
    let f = |x: &T| x.to_f64().unwrap_or(f64::NAN);
    let primal = lp.objective_value(&sol.x);
    let dual = lp.dual_value(&sol.dual);
    LpCertificate {
        primal_residual: res.iter().fold(0.0, |m, r| m.max(f(r).abs())),
        duality_gap: (f(&primal) - f(&dual)).abs(),
        slackness: sol.x.iter().zip(&slacks).fold(0.0, |s, (x, d)| s + f(x) * f(d)),
        min_dual_slack: slacks.iter().fold(f64::INFINITY, |m, d| m.min(f(d))),
        min_primal: sol.x.iter().fold(f64::INFINITY, |m, x| m.min(f(x))),
    }
}
