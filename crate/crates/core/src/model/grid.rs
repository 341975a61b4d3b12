//! Uniform half-open skill grid and the two-point mass splitting used for
//! every off-grid evaluation.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Nodes `x_i = i h`, `h = k_top / n`; the last node sits at `k_top - h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkillGrid<T> {
    pub n: usize,
    pub h: T,
    pub k_top: T,
}

/// Linear splitting of a point between its bracketing nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split<T> {
    pub lo: usize,
    pub hi: usize,
    /// Weight on `hi`; `lo` receives `1 - w_hi`.
    pub w_hi: T,
}

impl<T: Real> Split<T> {
    pub fn w_lo(&self) -> T {
        T::one() - self.w_hi
    }

    /// Linear interpolation of node values.
    pub fn interp(&self, values: &[T]) -> T {
        if self.w_hi == T::zero() {
            values[self.lo]
        } else {
            self.w_lo() * values[self.lo] + self.w_hi * values[self.hi]
        }
    }
}

impl<T: Real> SkillGrid<T> {
    pub fn new(n: usize, k_top: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "grid_n",
                value: 0.0,
                bound: "n >= 1",
            });
        }
        if !(k_top > T::zero()) || !k_top.is_finite() {
            return Err(Error::InvalidParameter {
                name: "k_top",
                value: to_f64(&k_top),
                bound: "k_top > 0",
            });
        }
        let h = k_top / T::from_usize(n).unwrap();
        Ok(SkillGrid { n, h, k_top })
    }

    #[inline]
    pub fn node(&self, i: usize) -> T {
        T::from_usize(i).unwrap() * self.h
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Splits a position given in index units (`x / h`).
    pub fn split_index(&self, t: T) -> Split<T> {
        let top = self.n - 1;
        let t = t.max(T::zero()).min(T::from_usize(top).unwrap());
        let lo_f = t.floor();
        let lo = lo_f.to_usize().unwrap_or(0).min(top);
        let frac = t - lo_f;
        let snap = lit::<T>(1e-12);
        if frac <= snap || lo == top {
            Split { lo, hi: lo, w_hi: T::zero() }
        } else if frac >= T::one() - snap {
            Split { lo: lo + 1, hi: lo + 1, w_hi: T::zero() }
        } else {
            Split { lo, hi: lo + 1, w_hi: frac }
        }
    }

    /// Splits a skill value.
    pub fn split(&self, x: T) -> Split<T> {
        self.split_index(x / self.h)
    }

    /// Split of `z = (1-θ) x_a + θ x_k`, computed in index units so that
    /// on-grid targets are hit exactly.
    pub fn split_pair(&self, a: usize, k: usize, theta: T) -> Split<T> {
        let fa = T::from_usize(a).unwrap();
        let fk = T::from_usize(k).unwrap();
        self.split_index((T::one() - theta) * fa + theta * fk)
    }

    /// Grid mean of node values, `⟨f⟩`.
    pub fn mean(&self, values: &[T]) -> T {
        let s = values.iter().fold(T::zero(), |acc, &x| acc + x);
        s / T::from_usize(self.n).unwrap()
    }

    pub fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::GridMismatch { expected: self.n, got });
        }
        Ok(())
    }
}
