//! The four envelope maps and the damped, convexified Bellman step.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{GridMeasure, SkillGrid, TechnologyParams};
use crate::scalar::{lit, Real};

/// Envelope values and their maximizers; ties go to the lowest index.
#[derive(Debug, Clone, PartialEq)]
pub struct Components<T> {
    pub v_w: Vec<T>,
    pub v_m: Vec<T>,
    pub u: Vec<T>,
    pub v_t: Vec<T>,
    /// Per student node, the best teacher.
    pub best_teacher: Vec<usize>,
    /// Per teacher node, the best student.
    pub best_student: Vec<usize>,
    /// Per worker node, the best manager.
    pub best_manager: Vec<usize>,
    /// Per manager node, the best worker.
    pub best_worker: Vec<usize>,
}

impl<T: Real> Components<T> {
    /// `max{v_w, v_m, v_t}` node-wise.
    pub fn upper(&self) -> Vec<T> {
        (0..self.v_w.len()).map(|i| self.v_w[i].max(self.v_m[i]).max(self.v_t[i])).collect()
    }
}

fn argmax<T: Real>(n: usize, f: impl Fn(usize) -> T) -> (T, usize) {
    let mut best = f(0);
    let mut at = 0;
    for j in 1..n {
        let x = f(j);
        if x > best {
            best = x;
            at = j;
        }
    }
    (best, at)
}

/// Student payoff `S(v)(a) = max_k c b_E(z) + v(z) - v(k)/N`.
pub(crate) fn student_wage<T: Real>(inst: &Instance<T>, v: &[T]) -> (Vec<T>, Vec<usize>) {
    let n = inst.n();
    let big_n = inst.params.n_students;
    (0..n)
        .into_par_iter()
        .map(|a| argmax(n, |k| inst.edu(a, k) + inst.split(a, k).interp(v) - v[k] / big_n))
        .unzip()
}

/// `v_t(k) = N max_a c b_E(z) + v(z) - u(a)` for a given `u`.
pub(crate) fn teacher_wage<T: Real>(inst: &Instance<T>, v: &[T], u: &[T]) -> (Vec<T>, Vec<usize>) {
    let n = inst.n();
    let big_n = inst.params.n_students;
    (0..n)
        .into_par_iter()
        .map(|k| {
            let (m, a) = argmax(n, |a| inst.edu(a, k) + inst.split(a, k).interp(v) - u[a]);
            (big_n * m, a)
        })
        .unzip()
}

/// `v_w` and `v_m` with their maximizers.
pub(crate) fn labor_wages<T: Real>(inst: &Instance<T>, v: &[T]) -> (Vec<T>, Vec<usize>, Vec<T>, Vec<usize>) {
    let n = inst.n();
    let np = inst.params.n_workers;
    let (v_w, best_manager): (Vec<T>, Vec<usize>) =
        (0..n).into_par_iter().map(|i| argmax(n, |j| inst.labor(i, j) - v[j] / np)).unzip();
    let (v_m, best_worker): (Vec<T>, Vec<usize>) = (0..n)
        .into_par_iter()
        .map(|j| {
            let (m, i) = argmax(n, |i| inst.labor(i, j) - v[i]);
            (np * m, i)
        })
        .unzip();
    (v_w, best_manager, v_m, best_worker)
}

/// All components for `v`, with `u = S(v)`. No monotonicity requirement.
pub fn envelope<T: Real>(inst: &Instance<T>, v: &[T]) -> Result<Components<T>> {
    inst.grid.check_len(v.len())?;
    let (u, best_teacher) = student_wage(inst, v);
    let (v_t, best_student) = teacher_wage(inst, v, &u);
    let (v_w, best_manager, v_m, best_worker) = labor_wages(inst, v);
    for (what, xs) in [("v_w", &v_w), ("v_m", &v_m), ("u", &u), ("v_t", &v_t)] {
        if let Some(node) = xs.iter().position(|x| !x.is_finite()) {
            return Err(Error::Overflow { what, node });
        }
    }
    Ok(Components { v_w, v_m, u, v_t, best_teacher, best_student, best_manager, best_worker })
}

pub(crate) fn check_monotone<T: Real>(v: &[T]) -> Result<()> {
    let scale = v.iter().fold(T::one(), |m, x| m.max(x.abs()));
    let slack = lit::<T>(1e-12) * scale;
    for i in 1..v.len() {
        if !v[i].is_finite() || v[i] < v[i - 1] - slack {
            return Err(Error::NonMonotone { node: i });
        }
    }
    Ok(())
}

/// `(v_w, v_m, v_t, u)` for a non-decreasing wage array, education weight `params.c`.
pub fn wage_components<T: Real>(v: &[T], params: &TechnologyParams<T>, grid: &SkillGrid<T>) -> Result<Components<T>> {
    check_monotone(v)?;
    let inst = technology(params, grid, params.c)?;
    envelope(&inst, v)
}

/// Instance carrying only technology tables (uniform `α`, `δ = 0`).
pub(crate) fn technology<T: Real>(params: &TechnologyParams<T>, grid: &SkillGrid<T>, c_eff: T) -> Result<Instance<T>> {
    let w = T::one() / T::from_usize(grid.n).unwrap();
    let alpha = GridMeasure::from_weights_unchecked(vec![w; grid.n]);
    Instance::new(params, grid, &alpha, T::zero(), c_eff)
}

/// Greatest convex non-decreasing minorant of node values on a uniform grid.
pub fn convexify<T: Real>(values: &[T]) -> Vec<T> {
    let n = values.len();
    if n <= 1 {
        return values.to_vec();
    }
    let x = |i: usize| T::from_usize(i).unwrap();
    // lower hull by monotone chain; collinear points are kept
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let (p, q) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (x(q) - x(p)) * (values[i] - values[p]) - (values[q] - values[p]) * (x(i) - x(p));
            if cross < T::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![T::zero(); n];
    for w in hull.windows(2) {
        let (p, q) = (w[0], w[1]);
        out[p] = values[p];
        let slope = (values[q] - values[p]) / (x(q) - x(p));
        for (i, o) in out.iter_mut().enumerate().take(q).skip(p + 1) {
            *o = values[p] + slope * (x(i) - x(p));
        }
    }
    out[n - 1] = values[n - 1];
    // flatten the decreasing part at the hull minimum
    let (min_at, _) = out.iter().enumerate().fold((0, out[0]), |(bi, bv), (i, &y)| if y < bv { (i, y) } else { (bi, bv) });
    let floor = out[min_at];
    for o in out.iter_mut().take(min_at) {
        *o = floor;
    }
    out
}

/// `(1-d) v + d · convexify(max{v_w, v_m, v_t})`.
pub fn bellman_step<T: Real>(v: &[T], inst: &Instance<T>, damping: T) -> Result<Vec<T>> {
    let comps = envelope(inst, v)?;
    let target = convexify(&comps.upper());
    Ok(v.iter().zip(&target).map(|(&a, &b)| (T::one() - damping) * a + damping * b).collect())
}
