//! A fully specified discretized economy with its pair tables precomputed.

use crate::error::{Error, Result};
use crate::model::{GridMeasure, SkillGrid, Split, TechnologyParams};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct Instance<T> {
    pub params: TechnologyParams<T>,
    pub grid: SkillGrid<T>,
    pub alpha: GridMeasure<T>,
    pub delta: T,
    /// Weight on the education technology actually used (`c`, or `c_δ` when `c = 0`).
    pub c_eff: T,
    /// `c_eff · b_E(z(x_a, x_k))`, row-major in `(a, k)`.
    pub edu: Vec<T>,
    /// `b_L((1-θ') x_i + θ' x_j)`, row-major in `(i, j)`: worker `i`, manager `j`.
    pub labor: Vec<T>,
    /// Split of `z(x_a, x_k)`, row-major in `(a, k)`.
    pub splits: Vec<Split<T>>,
}

impl<T: Real> Instance<T> {
    pub fn new(
        params: &TechnologyParams<T>,
        grid: &SkillGrid<T>,
        alpha: &GridMeasure<T>,
        delta: T,
        c_eff: T,
    ) -> Result<Self> {
        params.validate()?;
        grid.check_len(alpha.len())?;
        if !(delta >= T::zero()) || !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: crate::scalar::to_f64(&delta),
                bound: "delta >= 0",
            });
        }
        let n = grid.n;
        let mut edu = Vec::with_capacity(n * n);
        let mut labor = Vec::with_capacity(n * n);
        let mut splits = Vec::with_capacity(n * n);
        let (th, thp) = (params.theta, params.theta_prime);
        let one = T::one();
        for a in 0..n {
            let xa = grid.node(a);
            for k in 0..n {
                let xk = grid.node(k);
                let z = if a == k { xa } else { (one - th) * xa + th * xk };
                edu.push(c_eff * params.b_e.value(z));
                let zl = if a == k { xa } else { (one - thp) * xa + thp * xk };
                labor.push(params.b_l.value(zl));
                splits.push(grid.split_pair(a, k, th));
            }
        }
        Ok(Instance { params: params.clone(), grid: *grid, alpha: alpha.clone(), delta, c_eff, edu, labor, splits })
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    /// Per-node perturbation mass `δ / n`.
    pub fn delta_node(&self) -> T {
        self.delta / T::from_usize(self.grid.n).unwrap()
    }

    /// `α + δ/n` per node.
    pub fn alpha_tilde(&self) -> Vec<T> {
        let d = self.delta_node();
        self.alpha.weights.iter().map(|&w| w + d).collect()
    }

    #[inline]
    pub fn edu(&self, a: usize, k: usize) -> T {
        self.edu[a * self.grid.n + k]
    }

    #[inline]
    pub fn labor(&self, i: usize, j: usize) -> T {
        self.labor[i * self.grid.n + j]
    }

    #[inline]
    pub fn split(&self, a: usize, k: usize) -> Split<T> {
        self.splits[a * self.grid.n + k]
    }

    /// `f(a,k) = u(a) + v(k)/N - c b_E(z) - v(z)`.
    #[inline]
    pub fn f(&self, u: &[T], v: &[T], a: usize, k: usize) -> T {
        u[a] + v[k] / self.params.n_students - self.edu(a, k) - self.split(a, k).interp(v)
    }

    /// `g(i,j) = v(i) + v(j)/N' - b_L((1-θ')x_i + θ' x_j)`.
    #[inline]
    pub fn g(&self, v: &[T], i: usize, j: usize) -> T {
        v[i] + v[j] / self.params.n_workers - self.labor(i, j)
    }

    /// Dual objective `α(u) + δ⟨u + v⟩`.
    pub fn dual_objective(&self, u: &[T], v: &[T]) -> T {
        let s = u.iter().zip(v).fold(T::zero(), |acc, (&x, &y)| acc + x + y);
        self.alpha.integrate(u) + self.delta_node() * s
    }
}
