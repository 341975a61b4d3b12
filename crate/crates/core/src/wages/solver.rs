//! Wage solver: envelope iteration, budget restoration, envelope polish.
//!
//! The damped convexified iteration alone can stall at fixed points of
//! `v = max{v_w, v_m, v_t}` that are not optimal (the fixed-point equation
//! is necessary, not sufficient). Its output therefore seeds a restricted
//! primal master over a few columns of the LP; columns whose stability
//! residual `f` or `g` is negative are added until none remain, which is
//! exactly dual feasibility of the master's multipliers. A final polish
//! `v <- v - λ (v - max{v_w, v_m, v_t})` with `λ <= 1/2` keeps `(u, v)`
//! feasible, never raises the objective, and drives the envelope residual
//! to zero off the support where the multipliers are otherwise arbitrary.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::assemble::{eps_column, eps_index, lambda_column, lambda_index, rhs_of, seed_basis, LPSolution};
use crate::lp::simplex::{LpStatus, Simplex};
use crate::model::{GridCoupling, GridMeasure, SkillGrid, TechnologyParams};
use crate::scalar::{lit, to_f64, Real};
use crate::wages::envelope::{convexify, envelope, labor_wages, student_wage, teacher_wage, Components};
use crate::wages::residuals::residuals_on;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub delta: T,
    /// Education weight used when `c = 0`.
    pub c_delta: T,
    pub tol: T,
    pub max_iter: usize,
    pub damping: T,
    pub delta_factor: T,
    pub delta_floor: T,
    /// Envelope iterations spent before restoration starts.
    pub bellman_budget: usize,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            delta: T::zero(),
            c_delta: T::zero(),
            tol: lit(1e-9),
            max_iter: 100_000,
            damping: lit(0.5),
            delta_factor: lit(0.5),
            delta_floor: lit(1e-6),
            bellman_budget: 200,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value: T, bound| Err(Error::InvalidParameter { name, value: to_f64(&value), bound });
        if !(self.tol > T::zero()) {
            return bad("tol", self.tol, "tol > 0");
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return bad("damping", self.damping, "0 < damping <= 1");
        }
        if !(self.delta >= T::zero()) {
            return bad("delta", self.delta, "delta >= 0");
        }
        if !(self.c_delta >= T::zero()) {
            return bad("c_delta", self.c_delta, "c_delta >= 0");
        }
        if !(self.delta_factor > T::zero() && self.delta_factor < T::one()) {
            return bad("delta_factor", self.delta_factor, "0 < factor < 1");
        }
        if !(self.delta_floor > T::zero()) {
            return bad("delta_floor", self.delta_floor, "floor > 0");
        }
        Ok(())
    }

    /// Education weight in force for `params`.
    pub fn c_eff(&self, params: &TechnologyParams<T>) -> T {
        if params.c > T::zero() {
            params.c
        } else {
            self.c_delta
        }
    }
}

/// Converged wages with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct WageProfile<T> {
    pub v: Vec<T>,
    pub u: Vec<T>,
    pub v_w: Vec<T>,
    pub v_m: Vec<T>,
    pub v_t: Vec<T>,
    /// Per teacher node, the best student index.
    pub argmax_teacher: Vec<usize>,
    /// Per student node, the best teacher index.
    pub best_teacher: Vec<usize>,
    pub converged: bool,
    /// Envelope iterations plus restoration rounds plus polish steps.
    pub iterations: usize,
    pub stats: SolveStats,
    /// `α(u) + δ⟨u + v⟩`.
    pub objective: T,
    pub delta: T,
    pub c_eff: T,
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct SolveStats {
    pub bellman_iterations: usize,
    pub bellman_converged: bool,
    pub bellman_restarts: usize,
    pub damping_used: f64,
    /// Gap between the envelope-iteration objective and the optimum.
    pub bellman_gap: f64,
    pub restoration_rounds: usize,
    pub master_columns: usize,
    pub simplex_iterations: usize,
    pub polish_steps: usize,
    pub envelope_residual: f64,
}

/// Profile plus the master's primal couplings and the column set used.
#[derive(Debug, Clone)]
pub struct Equilibrium<T> {
    pub profile: WageProfile<T>,
    pub eps: GridCoupling<T>,
    pub lambda: GridCoupling<T>,
    /// Master primal objective.
    pub value: T,
    /// Global LP column indices present in the master.
    pub columns: Vec<usize>,
    /// Master row multipliers before polishing: `u` then `v`.
    pub dual: Vec<T>,
    /// Master reached a pricing round with no violated column.
    pub optimal: bool,
    pub delta: T,
}

impl<T: Real> Equilibrium<T> {
    /// The master's primal/dual pair as a solution of the full LP.
    pub fn lp_solution(&self) -> LPSolution<T> {
        let n = self.eps.n;
        let mut x = vec![T::zero(); 2 * n * n];
        for &(a, k, w) in &self.eps.entries {
            x[eps_index(n, a, k)] = w;
        }
        for &(i, j, w) in &self.lambda.entries {
            x[lambda_index(n, i, j)] = w;
        }
        LPSolution {
            n,
            delta: self.delta,
            eps: self.eps.clone(),
            lambda: self.lambda.clone(),
            dual: self.dual.clone(),
            value: self.value,
            status: if self.optimal { LpStatus::Optimal } else { LpStatus::IterationLimit },
            iterations: self.profile.stats.simplex_iterations,
            x,
        }
    }
}

fn sup_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

/// Damped convexified iteration from `N'/(N'+1) b_L`, with restarts at
/// half damping when the sup-norm changes stop decreasing.
fn envelope_iteration<T: Real>(inst: &Instance<T>, config: &SolverConfig<T>, stats: &mut SolveStats) -> Result<Vec<T>> {
    let p = &inst.params;
    let floor_factor = p.n_workers / (p.n_workers + T::one());
    let v0: Vec<T> = (0..inst.n()).map(|i| floor_factor * p.b_l.value(inst.grid.node(i))).collect();
    let budget = config.bellman_budget.min(config.max_iter);
    let mut damping = config.damping;
    let mut v = v0.clone();
    let mut total = 0;
    for restart in 0..=3 {
        v = v0.clone();
        let mut changes: Vec<T> = Vec::new();
        let mut cycling = false;
        let mut done = false;
        while total < budget {
            let comps = envelope(inst, &v)?;
            let target = convexify(&comps.upper());
            let next: Vec<T> = v.iter().zip(&target).map(|(&a, &b)| (T::one() - damping) * a + damping * b).collect();
            let change = sup_diff(&next, &v);
            v = next;
            total += 1;
            if change < config.tol {
                done = true;
                break;
            }
            changes.push(change);
            let w = changes.len();
            if w >= 40 {
                let recent = changes[w - 20..].iter().fold(T::zero(), |m, &x| m.max(x));
                let before = changes[w - 40..w - 20].iter().fold(T::zero(), |m, &x| m.max(x));
                if recent >= before {
                    cycling = true;
                    break;
                }
            }
        }
        stats.bellman_restarts = restart;
        stats.bellman_converged = done;
        if !cycling || restart == 3 {
            break;
        }
        damping = damping * lit(0.5);
    }
    stats.bellman_iterations = total;
    stats.damping_used = to_f64(&damping);
    Ok(v)
}

struct Master<T> {
    simplex: Simplex<T>,
    /// Master column index per global column, `usize::MAX` if absent.
    slot: Vec<usize>,
    global: Vec<usize>,
}

impl<T: Real> Master<T> {
    fn new(inst: &Instance<T>) -> Self {
        let n = inst.n();
        let mut m = Master { simplex: Simplex::new(rhs_of(inst)), slot: vec![usize::MAX; 2 * n * n], global: Vec::new() };
        let seed = seed_basis(n);
        for &j in &seed {
            m.add(inst, j);
        }
        let local: Vec<usize> = seed.iter().map(|&j| m.slot[j]).collect();
        let ok = m.simplex.set_basis(&local);
        debug_assert!(ok, "diagonal seed basis must be feasible");
        m
    }

    fn add(&mut self, inst: &Instance<T>, j: usize) -> bool {
        if self.slot[j] != usize::MAX {
            return false;
        }
        let n = inst.n();
        let (col, cost) = if j < n * n {
            let (a, k) = (j / n, j % n);
            (eps_column(inst, a, k), inst.edu(a, k))
        } else {
            let (i, jj) = ((j - n * n) / n, (j - n * n) % n);
            (lambda_column(inst, i, jj), inst.labor(i, jj))
        };
        self.slot[j] = self.simplex.add_column(col, cost);
        self.global.push(j);
        true
    }

    fn add_pricing(&mut self, inst: &Instance<T>, c: &Components<T>) -> usize {
        let n = inst.n();
        let mut added = 0;
        for a in 0..n {
            added += self.add(inst, eps_index(n, a, c.best_teacher[a])) as usize;
        }
        for k in 0..n {
            added += self.add(inst, eps_index(n, c.best_student[k], k)) as usize;
            added += self.add(inst, lambda_index(n, k, c.best_manager[k])) as usize;
            added += self.add(inst, lambda_index(n, c.best_worker[k], k)) as usize;
        }
        added
    }
}

/// Most negative residuals per row and column of both blocks; returns the
/// violating global columns.
fn price<T: Real>(inst: &Instance<T>, u: &[T], v: &[T], tol: T) -> Vec<usize> {
    use rayon::prelude::*;
    let n = inst.n();
    let neg = -tol;
    let min_by = |m: usize, f: &(dyn Fn(usize) -> T + Sync)| {
        let mut best = f(0);
        let mut at = 0;
        for j in 1..m {
            let x = f(j);
            if x < best {
                best = x;
                at = j;
            }
        }
        (best, at)
    };
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let mut out = Vec::new();
            let (f, k) = min_by(n, &|k| inst.f(u, v, r, k));
            if f < neg {
                out.push(eps_index(n, r, k));
            }
            let (f, a) = min_by(n, &|a| inst.f(u, v, a, r));
            if f < neg {
                out.push(eps_index(n, a, r));
            }
            let (g, j) = min_by(n, &|j| inst.g(v, r, j));
            if g < neg {
                out.push(lambda_index(n, r, j));
            }
            let (g, i) = min_by(n, &|i| inst.g(v, i, r));
            if g < neg {
                out.push(lambda_index(n, i, r));
            }
            out
        })
        .collect();
    rows.into_iter().flatten().collect()
}

fn polish<T: Real>(inst: &Instance<T>, mut u: Vec<T>, mut v: Vec<T>, config: &SolverConfig<T>, stats: &mut SolveStats) -> (Vec<T>, Vec<T>, bool) {
    let lambda = lit::<T>(0.5);
    let cap = config.max_iter.min(20_000);
    let target = config.tol * lit(0.1);
    for step in 0..=cap {
        let (v_t, _) = teacher_wage(inst, &v, &u);
        let (v_w, _, v_m, _) = labor_wages(inst, &v);
        let mut eta = T::zero();
        let next: Vec<T> = (0..inst.n())
            .map(|i| {
                let bar = v_w[i].max(v_m[i]).max(v_t[i]);
                let e = (v[i] - bar).max(T::zero());
                eta = eta.max(e);
                v[i] - lambda * e
            })
            .collect();
        stats.polish_steps = step;
        if eta <= target {
            let (s, _) = student_wage(inst, &v);
            return (s, v, true);
        }
        v = next;
        // S(v) is the least u compatible with v
        u = student_wage(inst, &v).0;
    }
    let (s, _) = student_wage(inst, &v);
    (s, v, false)
}

/// Dual optima are not unique at nodes no adult occupies, and the polished
/// profile can bend there. Prefer the convex non-decreasing minorant when it
/// stays dual feasible at no extra cost.
fn convex_selection<T: Real>(inst: &Instance<T>, u: Vec<T>, v: Vec<T>, tol: T) -> (Vec<T>, Vec<T>) {
    let lo = convexify(&v);
    if lo.iter().zip(&v).all(|(a, b)| *a == *b) {
        return (u, v);
    }
    let (s, _) = student_wage(inst, &lo);
    let before = inst.dual_objective(&u, &v);
    let scale = before.abs().max(T::one());
    let rep = residuals_on(inst, &s, &lo);
    let tol64 = to_f64(&tol);
    let feasible = rep.min_f >= -tol64 && rep.min_g >= -tol64 && rep.lower_bound_slack >= -tol64;
    if feasible && inst.dual_objective(&s, &lo) <= before + tol * scale {
        (s, lo)
    } else {
        (u, v)
    }
}

fn couplings<T: Real>(n: usize, master: &Master<T>) -> (GridCoupling<T>, GridCoupling<T>) {
    let x = master.simplex.primal();
    let mut eps = Vec::new();
    let mut lam = Vec::new();
    let mut order: Vec<(usize, T)> = master.global.iter().map(|&j| (j, x[master.slot[j]])).filter(|e| e.1 > T::zero()).collect();
    order.sort_by_key(|e| e.0);
    for (j, w) in order {
        if j < n * n {
            eps.push((j / n, j % n, w));
        } else {
            let r = j - n * n;
            lam.push((r / n, r % n, w));
        }
    }
    (GridCoupling { n, entries: eps }, GridCoupling { n, entries: lam })
}

/// Full solve on a prepared instance, optionally warm-started with a set of
/// global LP columns.
pub fn solve_instance<T: Real>(inst: &Instance<T>, config: &SolverConfig<T>, warm: &[usize]) -> Result<Equilibrium<T>> {
    config.validate()?;
    let n = inst.n();
    let mut stats = SolveStats::default();
    let v_bell = envelope_iteration(inst, config, &mut stats)?;
    let comps = envelope(inst, &v_bell)?;
    let bell_obj = inst.dual_objective(&comps.u, &v_bell);

    let mut master = Master::new(inst);
    for &j in warm {
        if j < 2 * n * n {
            master.add(inst, j);
        }
    }
    master.add_pricing(inst, &comps);
    let price_tol = T::cost_tol();
    let mut optimal = false;
    let round_cap = config.max_iter.min(10 * n + 100);
    for round in 0..round_cap {
        let st = master.simplex.solve();
        stats.restoration_rounds = round + 1;
        if st != LpStatus::Optimal {
            break;
        }
        let y = master.simplex.dual();
        let (u, v) = y.split_at(n);
        let mut added = 0;
        for j in price(inst, u, v, price_tol) {
            added += master.add(inst, j) as usize;
        }
        if added == 0 {
            optimal = true;
            break;
        }
    }
    stats.master_columns = master.global.len();
    stats.simplex_iterations = master.simplex.iterations;
    let value = master.simplex.value();
    let y = master.simplex.dual();
    let dual = y.clone();
    let (u0, v0) = (y[..n].to_vec(), y[n..].to_vec());
    let (u, v, polished) = polish(inst, u0, v0, config, &mut stats);
    let (u, v) = convex_selection(inst, u, v, config.tol);
    let comps = envelope(inst, &v)?;
    let upper = comps.upper();
    stats.envelope_residual = to_f64(&sup_diff(&v, &upper));
    let objective = inst.dual_objective(&u, &v);
    stats.bellman_gap = to_f64(&(bell_obj - objective));
    let (eps, lambda) = couplings(n, &master);
    let profile = WageProfile {
        v,
        u,
        v_w: comps.v_w,
        v_m: comps.v_m,
        v_t: comps.v_t,
        argmax_teacher: comps.best_student,
        best_teacher: comps.best_teacher,
        converged: optimal && polished,
        iterations: stats.bellman_iterations + stats.restoration_rounds + stats.polish_steps,
        stats,
        objective,
        delta: inst.delta,
        c_eff: inst.c_eff,
    };
    let mut columns = master.global.clone();
    columns.sort_unstable();
    Ok(Equilibrium { profile, eps, lambda, value, columns, dual, optimal, delta: inst.delta })
}

/// Minimizing wages for `(params, α)` at `config.delta`.
pub fn solve_wages<T: Real>(
    params: &TechnologyParams<T>,
    alpha: &GridMeasure<T>,
    grid: &SkillGrid<T>,
    config: &SolverConfig<T>,
) -> Result<WageProfile<T>> {
    Ok(solve_equilibrium(params, alpha, grid, config)?.profile)
}

/// As [`solve_wages`], also returning the optimal couplings.
pub fn solve_equilibrium<T: Real>(
    params: &TechnologyParams<T>,
    alpha: &GridMeasure<T>,
    grid: &SkillGrid<T>,
    config: &SolverConfig<T>,
) -> Result<Equilibrium<T>> {
    config.validate()?;
    let inst = Instance::new(params, grid, alpha, config.delta, config.c_eff(params))?;
    solve_instance(&inst, config, &[])
}

/// Result of a δ continuation.
#[derive(Debug, Clone)]
pub struct Continuation<T> {
    /// `(δ_i, profile)` along the schedule.
    pub members: Vec<(T, WageProfile<T>)>,
    /// Direct solve at `δ = 0`.
    pub zero: Option<WageProfile<T>>,
    /// Linear extrapolation to `δ = 0` from the last two members.
    pub extrapolated_v: Vec<T>,
    pub extrapolated_u: Vec<T>,
    /// True when member objectives decrease with δ.
    pub monotone_objectives: bool,
    pub truncated: bool,
}

/// Solves along `δ_i = δ₀ · factor^i` down to the floor, warm-starting
/// each solve with the previous column set. With `c = 0` each member
/// uses `c_δ = δ_i`.
pub fn delta_continuation<T: Real>(
    params: &TechnologyParams<T>,
    alpha: &GridMeasure<T>,
    grid: &SkillGrid<T>,
    config: &SolverConfig<T>,
) -> Result<Continuation<T>> {
    config.validate()?;
    if !(config.delta > T::zero()) {
        return Err(Error::InvalidParameter { name: "delta", value: 0.0, bound: "delta > 0 to start a continuation" });
    }
    let mut members: Vec<(T, WageProfile<T>)> = Vec::new();
    let mut warm: Vec<usize> = Vec::new();
    let mut truncated = false;
    let mut delta = config.delta;
    while delta >= config.delta_floor {
        let c_eff = if params.c > T::zero() { params.c } else { delta };
        let inst = Instance::new(params, grid, alpha, delta, c_eff)?;
        let eq = solve_instance(&inst, config, &warm)?;
        warm = eq.columns;
        let ok = eq.profile.converged;
        members.push((delta, eq.profile));
        if !ok {
            truncated = true;
            break;
        }
        delta = delta * config.delta_factor;
    }
    let zero = if truncated {
        None
    } else {
        let mut c0 = config.clone();
        c0.delta = T::zero();
        c0.c_delta = T::zero();
        Some(solve_wages(params, alpha, grid, &c0)?)
    };
    let (extrapolated_v, extrapolated_u) = match members.len() {
        0 => (Vec::new(), Vec::new()),
        1 => (members[0].1.v.clone(), members[0].1.u.clone()),
        m => {
            let (d1, p1) = &members[m - 2];
            let (d2, p2) = &members[m - 1];
            let r = *d2 / (*d1 - *d2);
            let ex = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x1, &x2)| x2 - r * (x1 - x2)).collect::<Vec<T>>();
            (ex(&p1.v, &p2.v), ex(&p1.u, &p2.u))
        }
    };
    let monotone_objectives = members.windows(2).all(|w| w[1].1.objective <= w[0].1.objective);
    Ok(Continuation { members, zero, extrapolated_v, extrapolated_u, monotone_objectives, truncated })
}
