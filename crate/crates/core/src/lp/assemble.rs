//! The discretized planner's LP: assembly, diagonal seed and solve.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::simplex::{LpStatus, Simplex, SparseCol};
use crate::model::{GridCoupling, GridMeasure, SkillGrid, TechnologyParams};
use crate::scalar::{LpScalar, Real};

/// Largest grid accepted by the dense solver.
pub const MAX_DENSE_N: usize = 512;

/// `max c·x, A x = b, x >= 0` with `2n²` variables (`ε` then `λ`,
/// row-major) and `2n` rows (student marginals, then steady state).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLP<T> {
    pub n: usize,
    pub delta: T,
    pub objective: Vec<T>,
    pub columns: Vec<SparseCol<T>>,
    pub rhs: Vec<T>,
    /// Diagonal seed basis: `ε_ii` and `λ_ii` for every node.
    pub seed_basis: Vec<usize>,
}

#[inline]
pub fn eps_index(n: usize, a: usize, k: usize) -> usize {
    a * n + k
}

#[inline]
pub fn lambda_index(n: usize, i: usize, j: usize) -> usize {
    n * n + i * n + j
}

/// Column of `ε_{ak}`: student row `a`, `+1/N` on steady row `k`, minus the
/// split of `z(a,k)` on the steady rows.
pub fn eps_column<T: Real>(inst: &Instance<T>, a: usize, k: usize) -> SparseCol<T> {
    let n = inst.n();
    let s = inst.split(a, k);
    let mut pairs = vec![(a, T::one()), (n + k, T::one() / inst.params.n_students), (n + s.lo, -s.w_lo())];
    if s.w_hi > T::zero() {
        pairs.push((n + s.hi, -s.w_hi));
    }
    SparseCol::from_pairs(pairs)
}

/// Column of `λ_{ij}`: `+1` on steady row `i`, `+1/N'` on steady row `j`.
pub fn lambda_column<T: Real>(inst: &Instance<T>, i: usize, j: usize) -> SparseCol<T> {
    let n = inst.n();
    SparseCol::from_pairs(vec![(n + i, T::one()), (n + j, T::one() / inst.params.n_workers)])
}

/// Right-hand side `(α + δ/n, δ/n)`.
pub fn rhs_of<T: Real>(inst: &Instance<T>) -> Vec<T> {
    let d = inst.delta_node();
    let mut rhs = inst.alpha_tilde();
    rhs.extend(std::iter::repeat(d).take(inst.n()));
    rhs
}

pub fn seed_basis(n: usize) -> Vec<usize> {
    let mut b: Vec<usize> = (0..n).map(|i| eps_index(n, i, i)).collect();
    b.extend((0..n).map(|i| lambda_index(n, i, i)));
    b
}

pub fn assemble_from_instance<T: Real>(inst: &Instance<T>) -> Result<DiscreteLP<T>> {
    let n = inst.n();
    if n > MAX_DENSE_N {
        return Err(Error::TooLarge { n, limit: MAX_DENSE_N });
    }
    let mut objective = Vec::with_capacity(2 * n * n);
    let mut columns = Vec::with_capacity(2 * n * n);
    for a in 0..n {
        for k in 0..n {
            objective.push(inst.edu(a, k));
            columns.push(eps_column(inst, a, k));
        }
    }
    for i in 0..n {
        for j in 0..n {
            objective.push(inst.labor(i, j));
            columns.push(lambda_column(inst, i, j));
        }
    }
    Ok(DiscreteLP { n, delta: inst.delta, objective, columns, rhs: rhs_of(inst), seed_basis: seed_basis(n) })
}

/// Assembles the δ-perturbed primal with education weight `c`.
pub fn assemble_primal<T: Real>(
    params: &TechnologyParams<T>,
    alpha: &GridMeasure<T>,
    grid: &SkillGrid<T>,
    delta: T,
) -> Result<DiscreteLP<T>> {
    if grid.n > MAX_DENSE_N {
        return Err(Error::TooLarge { n: grid.n, limit: MAX_DENSE_N });
    }
    assemble_from_instance(&Instance::new(params, grid, alpha, delta, params.c)?)
}

/// Diagonal feasible point: `ε = diag(α + δ/n)`,
/// `λ = ((1-1/N) ε + δ/n diag) / (1 + 1/N')`.
pub fn feasible_seed<T: Real>(
    params: &TechnologyParams<T>,
    alpha: &GridMeasure<T>,
    grid: &SkillGrid<T>,
    delta: T,
) -> Result<(GridCoupling<T>, GridCoupling<T>)> {
    grid.check_len(alpha.len())?;
    let one = T::one();
    let d = delta / T::from_usize(grid.n).unwrap();
    let keep = one - one / params.n_students;
    let denom = one + one / params.n_workers;
    let mut eps = Vec::with_capacity(grid.n);
    let mut lam = Vec::with_capacity(grid.n);
    for (i, &w) in alpha.weights.iter().enumerate() {
        let e = w + d;
        eps.push((i, i, e));
        lam.push((i, i, (keep * e + d) / denom));
    }
    Ok((GridCoupling { n: grid.n, entries: eps }, GridCoupling { n: grid.n, entries: lam }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LPSolution<T> {
    pub n: usize,
    pub delta: T,
    pub eps: GridCoupling<T>,
    pub lambda: GridCoupling<T>,
    /// Row multipliers: first `n` are `u`, last `n` are `v`.
    pub dual: Vec<T>,
    pub value: T,
    pub status: LpStatus,
    pub iterations: usize,
    /// Full primal vector in variable order.
    pub x: Vec<T>,
}

impl<T: Clone> LPSolution<T> {
    pub fn u(&self) -> &[T] {
        &self.dual[..self.n]
    }

    pub fn v(&self) -> &[T] {
        &self.dual[self.n..]
    }
}

/// Solves from the diagonal seed basis (no phase one needed).
pub fn solve_lp<T: LpScalar>(lp: &DiscreteLP<T>) -> LPSolution<T> {
    let n = lp.n;
    let mut s = Simplex::new(lp.rhs.clone());
    for (col, c) in lp.columns.iter().zip(&lp.objective) {
        s.add_column(col.clone(), c.clone());
    }
    if !s.set_basis(&lp.seed_basis) {
        // generic fallback: phase one from artificials
        s = Simplex::new(lp.rhs.clone());
        for (col, c) in lp.columns.iter().zip(&lp.objective) {
            s.add_column(col.clone(), c.clone());
        }
    }
    let status = s.solve();
    let x = s.primal();
    let couple = |offset: usize| {
        let entries = (0..n * n)
            .filter(|&j| x[offset + j] > T::zero())
            .map(|j| (j / n, j % n, x[offset + j].clone()))
            .collect();
        GridCoupling { n, entries }
    };
    LPSolution {
        n,
        delta: lp.delta.clone(),
        eps: couple(0),
        lambda: couple(n * n),
        dual: s.dual(),
        value: s.value(),
        status,
        iterations: s.iterations,
        x,
    }
}

impl<T: LpScalar> DiscreteLP<T> {
    pub fn variables(&self) -> usize {
        self.columns.len()
    }

    /// `A x - b` per row.
    pub fn residual(&self, x: &[T]) -> Vec<T> {
        let mut r: Vec<T> = self.rhs.iter().map(|b| T::zero() - b.clone()).collect();
        for (col, xj) in self.columns.iter().zip(x) {
            if xj.is_zero() {
                continue;
            }
            for (row, a) in col.rows.iter().zip(&col.vals) {
                r[*row] = r[*row].clone() + a.clone() * xj.clone();
            }
        }
        r
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        self.objective.iter().zip(x).fold(T::zero(), |a, (c, x)| a + c.clone() * x.clone())
    }

    /// `b·y`.
    pub fn dual_value(&self, y: &[T]) -> T {
        self.rhs.iter().zip(y).fold(T::zero(), |a, (b, y)| a + b.clone() * y.clone())
    }

    /// Reduced slacks `A_j·y - c_j` (these are `f` and `g` on the grid).
    pub fn dual_slacks(&self, y: &[T]) -> Vec<T> {
        self.columns
            .iter()
            .zip(&self.objective)
            .map(|(col, c)| {
                let mut s = T::zero() - c.clone();
                for (row, a) in col.rows.iter().zip(&col.vals) {
                    s = s + a.clone() * y[*row].clone();
                }
                s
            })
            .collect()
    }

    /// Multiplies every objective coefficient by `s`.
    pub fn scale_objective(&mut self, s: T) {
        for c in &mut self.objective {
            *c = c.clone() * s.clone();
        }
    }
}
