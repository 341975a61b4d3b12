//! Dense revised simplex on sparse columns, generic over the scalar.
//!
//! Problem form: maximize `c·x` subject to `A x = b`, `x >= 0`. The basis
//! inverse is kept explicitly, updated by elementary row operations and
//! rebuilt by Gauss-Jordan elimination every `refactor_every` pivots.
//! Pricing is Dantzig's largest reduced cost with a Harris ratio test; after
//! a run of degenerate pivots the ratio test turns lexicographic until
//! progress resumes, which rules out cycling.

use crate::scalar::LpScalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseCol<T> {
    pub rows: Vec<usize>,
    pub vals: Vec<T>,
}

impl<T: LpScalar> SparseCol<T> {
    /// Builds a column from `(row, coef)` pairs, merging duplicate rows and
    /// dropping exact zeros. Rows come out sorted.
    pub fn from_pairs(mut pairs: Vec<(usize, T)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut rows: Vec<usize> = Vec::with_capacity(pairs.len());
        let mut vals: Vec<T> = Vec::with_capacity(pairs.len());
        for (r, v) in pairs {
            if rows.last() == Some(&r) {
                let last = vals.len() - 1;
                vals[last] = vals[last].clone() + v;
            } else {
                rows.push(r);
                vals.push(v);
            }
        }
        let mut out = SparseCol { rows: Vec::new(), vals: Vec::new() };
        for (r, v) in rows.into_iter().zip(vals) {
            if !v.is_zero() {
                out.rows.push(r);
                out.vals.push(v);
            }
        }
        out
    }

    pub fn unit(row: usize) -> Self {
        SparseCol { rows: vec![row], vals: vec![T::one()] }
    }

    fn dot(&self, y: &[T]) -> T {
        let mut s = T::zero();
        for (r, v) in self.rows.iter().zip(&self.vals) {
            s = s + v.clone() * y[*r].clone();
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Revised simplex state. Columns may be appended between solves; the
/// current basis stays primal feasible, so re-solving is a warm start.
#[derive(Debug, Clone)]
pub struct Simplex<T> {
    m: usize,
    rhs: Vec<T>,
    cols: Vec<SparseCol<T>>,
    cost: Vec<T>,
    /// Number of artificial columns at the front of `cols`.
    n_art: usize,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<T>,
    xb: Vec<T>,
    pub iterations: usize,
    pub refactor_every: usize,
    pub max_iterations: usize,
    pub degenerate_switch: usize,
    status: Option<LpStatus>,
}

fn is_pos<T: LpScalar>(x: &T, tol: &T) -> bool {
    *x > *tol
}

impl<T: LpScalar> Simplex<T> {
    /// Creates an empty problem with `m` equality rows. Rows with negative
    /// right-hand side are not allowed; callers flip signs beforehand.
    pub fn new(rhs: Vec<T>) -> Self {
        let m = rhs.len();
        Simplex {
            m,
            rhs,
            cols: Vec::new(),
            cost: Vec::new(),
            n_art: 0,
            basis: Vec::new(),
            in_basis: Vec::new(),
            binv: Vec::new(),
            xb: Vec::new(),
            iterations: 0,
            refactor_every: 64,
            max_iterations: 2_000_000,
            degenerate_switch: 40,
            status: None,
        }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    /// Number of structural (non-artificial) columns.
    pub fn columns(&self) -> usize {
        self.cols.len() - self.n_art
    }

    /// Appends a structural column and returns its index.
    pub fn add_column(&mut self, col: SparseCol<T>, cost: T) -> usize {
        self.cols.push(col);
        self.cost.push(cost);
        self.in_basis.push(false);
        self.cols.len() - 1 - self.n_art
    }

    fn is_artificial(&self, j: usize) -> bool {
        j < self.n_art
    }

    /// Installs a starting basis of structural column indices. Returns
    /// false if the basis matrix is singular or the basic solution is not
    /// non-negative.
    pub fn set_basis(&mut self, basis: &[usize]) -> bool {
        if basis.len() != self.m {
            return false;
        }
        let old = (self.basis.clone(), self.in_basis.clone());
        for b in &self.basis {
            self.in_basis[*b] = false;
        }
        self.basis = basis.iter().map(|j| j + self.n_art).collect();
        for b in &self.basis {
            self.in_basis[*b] = true;
        }
        let neg = T::zero() - T::feas_tol();
        if self.refactor() && self.xb.iter().all(|x| *x >= neg) {
            self.status = None;
            true
        } else {
            self.basis = old.0;
            self.in_basis = old.1;
            if !self.basis.is_empty() {
                self.refactor();
            }
            false
        }
    }

    /// Rebuilds `B^{-1}` and `x_B` from scratch.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut a = vec![T::zero(); m * m];
        for (pos, &j) in self.basis.iter().enumerate() {
            for (r, v) in self.cols[j].rows.iter().zip(&self.cols[j].vals) {
                a[r * m + pos] = v.clone();
            }
        }
        let mut inv = vec![T::zero(); m * m];
        for i in 0..m {
            inv[i * m + i] = T::one();
        }
        for col in 0..m {
            let mut piv = None;
            let mut best = T::zero();
            for r in col..m {
                let mag = a[r * m + col].abs();
                if mag > best {
                    best = mag;
                    piv = Some(r);
                }
            }
            let Some(p) = piv else { return false };
            if p != col {
                for c in 0..m {
                    a.swap(p * m + c, col * m + c);
                    inv.swap(p * m + c, col * m + c);
                }
            }
            let d = a[col * m + col].clone();
            // columns left of `col` are already eliminated; skip zeros in the pivot row
            let mut a_nz = Vec::new();
            for c in col..m {
                if !a[col * m + c].is_zero() {
                    a[col * m + c] = a[col * m + c].clone() / d.clone();
                    a_nz.push(c);
                }
            }
            let mut inv_nz = Vec::new();
            for c in 0..m {
                if !inv[col * m + c].is_zero() {
                    inv[col * m + c] = inv[col * m + c].clone() / d.clone();
                    inv_nz.push(c);
                }
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col].clone();
                if f.is_zero() {
                    continue;
                }
                for &c in &a_nz {
                    a[r * m + c] = a[r * m + c].clone() - f.clone() * a[col * m + c].clone();
                }
                for &c in &inv_nz {
                    inv[r * m + c] = inv[r * m + c].clone() - f.clone() * inv[col * m + c].clone();
                }
            }
        }
        // `inv` is now (B)^{-1} with rows indexed by basis position
        self.binv = inv;
        self.xb = (0..m)
            .map(|i| {
                let mut s = T::zero();
                for r in 0..m {
                    s = s + self.binv[i * m + r].clone() * self.rhs[r].clone();
                }
                s
            })
            .collect();
        true
    }

    /// Installs an all-artificial basis for phase one.
    fn install_artificials(&mut self) {
        let m = self.m;
        let mut cols: Vec<SparseCol<T>> = (0..m).map(SparseCol::unit).collect();
        cols.append(&mut self.cols);
        self.cols = cols;
        let mut cost = vec![T::zero(); m];
        cost.append(&mut self.cost);
        self.cost = cost;
        let mut ib = vec![false; m];
        ib.append(&mut self.in_basis);
        self.in_basis = ib;
        self.n_art = m;
        self.basis = (0..m).collect();
        for j in 0..m {
            self.in_basis[j] = true;
        }
        self.refactor();
    }

    fn duals(&self, cost: &[T]) -> Vec<T> {
        let m = self.m;
        let mut y = vec![T::zero(); m];
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = &cost[j];
            if cb.is_zero() {
                continue;
            }
            for (r, yr) in y.iter_mut().enumerate() {
                *yr = yr.clone() + cb.clone() * self.binv[i * m + r].clone();
            }
        }
        y
    }

    fn ftran(&self, j: usize) -> Vec<T> {
        let m = self.m;
        let col = &self.cols[j];
        let mut w = vec![T::zero(); m];
        for (i, wi) in w.iter_mut().enumerate() {
            let mut s = T::zero();
            for (r, v) in col.rows.iter().zip(&col.vals) {
                s = s + self.binv[i * m + r].clone() * v.clone();
            }
            *wi = s;
        }
        w
    }

    fn pivot(&mut self, r: usize, q: usize, w: &[T]) {
        let m = self.m;
        let wr = w[r].clone();
        let mut nz = Vec::new();
        for c in 0..m {
            if !self.binv[r * m + c].is_zero() {
                self.binv[r * m + c] = self.binv[r * m + c].clone() / wr.clone();
                nz.push(c);
            }
        }
        let theta = {
            let x = self.xb[r].clone();
            let x = if x < T::zero() { T::zero() } else { x };
            x / wr.clone()
        };
        for i in 0..m {
            if i == r || w[i].is_zero() {
                continue;
            }
            let f = w[i].clone();
            for &c in &nz {
                let d = f.clone() * self.binv[r * m + c].clone();
                self.binv[i * m + c] = self.binv[i * m + c].clone() - d;
            }
            self.xb[i] = self.xb[i].clone() - theta.clone() * f;
        }
        self.xb[r] = theta;
        self.in_basis[self.basis[r]] = false;
        self.basis[r] = q;
        self.in_basis[q] = true;
    }

    /// Runs primal simplex iterations with the given cost vector, never
    /// letting artificial columns enter.
    fn iterate(&mut self, cost: &[T], phase_two: bool) -> LpStatus {
        let ctol = T::cost_tol();
        let ptol = T::pivot_tol();
        let ftol = T::feas_tol();
        let mut degenerate = 0usize;
        let mut since_refactor = 0usize;
        let mut verified = false;
        loop {
            if self.iterations >= self.max_iterations {
                return LpStatus::IterationLimit;
            }
            let lex = degenerate >= self.degenerate_switch;
            let y = self.duals(cost);
            let mut enter: Option<usize> = None;
            let mut best = ctol.clone();
            for j in self.n_art..self.cols.len() {
                if self.in_basis[j] {
                    continue;
                }
                let d = cost[j].clone() - self.cols[j].dot(&y);
                if is_pos(&d, &best) {
                    enter = Some(j);
                    best = d;
                }
            }
            let Some(q) = enter else {
                if verified || since_refactor == 0 {
                    return LpStatus::Optimal;
                }
                // confirm optimality on a fresh factorization
                self.refactor();
                since_refactor = 0;
                verified = true;
                continue;
            };
            verified = false;
            let w = self.ftran(q);
            // basic artificials must leave as soon as they would move
            let mut leave: Option<usize> = None;
            for i in 0..self.m {
                if phase_two && self.is_artificial(self.basis[i]) && w[i].abs() > ptol {
                    leave = Some(i);
                    break;
                }
            }
            if leave.is_none() {
                if !w.iter().any(|x| is_pos(x, &ptol)) {
                    return LpStatus::Unbounded;
                }
                leave = if lex { self.lex_ratio(&w) } else { self.harris_ratio(&w) };
            }
            let r = leave.expect("ratio test found a row");
            let step_is_zero = self.xb[r] <= ftol;
            self.pivot(r, q, &w);
            self.iterations += 1;
            since_refactor += 1;
            if step_is_zero {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            if since_refactor >= self.refactor_every {
                self.refactor();
                since_refactor = 0;
            }
        }
    }

    fn clamped(&self, i: usize) -> T {
        if self.xb[i] < T::zero() {
            T::zero()
        } else {
            self.xb[i].clone()
        }
    }

    /// Two-pass Harris test: bound the step with `feas_tol` slack, then
    /// take the largest pivot among rows within the bound.
    fn harris_ratio(&self, w: &[T]) -> Option<usize> {
        let ptol = T::pivot_tol();
        let ftol = T::feas_tol();
        let mut bound: Option<T> = None;
        for i in 0..self.m {
            if is_pos(&w[i], &ptol) {
                let r = (self.clamped(i) + ftol.clone()) / w[i].clone();
                if bound.as_ref().map_or(true, |b| r < *b) {
                    bound = Some(r);
                }
            }
        }
        let bound = bound?;
        let mut pick: Option<usize> = None;
        for i in 0..self.m {
            if !is_pos(&w[i], &ptol) || self.clamped(i) / w[i].clone() > bound {
                continue;
            }
            if pick.map_or(true, |p| w[i] > w[p]) {
                pick = Some(i);
            }
        }
        pick
    }

    /// Minimum ratio with ties broken by the lexicographically smallest row
    /// of `B^{-1}` scaled by the pivot.
    fn lex_ratio(&self, w: &[T]) -> Option<usize> {
        let ptol = T::pivot_tol();
        let ftol = T::feas_tol();
        let m = self.m;
        let rows: Vec<usize> = (0..m).filter(|&i| is_pos(&w[i], &ptol)).collect();
        let min = rows.iter().map(|&i| self.clamped(i) / w[i].clone()).fold(None, |acc: Option<T>, r| match acc {
            Some(b) if b <= r => Some(b),
            _ => Some(r),
        })?;
        let ties: Vec<usize> =
            rows.into_iter().filter(|&i| self.clamped(i) - min.clone() * w[i].clone() <= ftol).collect();
        let lex_less = |i: usize, p: usize| {
            for c in 0..m {
                let a = self.binv[i * m + c].clone() / w[i].clone();
                let b = self.binv[p * m + c].clone() / w[p].clone();
                let scale = if a.abs() > b.abs() { a.abs() } else { b.abs() };
                let scale = if scale > T::one() { scale } else { T::one() };
                let gap = a.clone() - b.clone();
                if gap.abs() > ptol.clone() * scale {
                    return gap < T::zero();
                }
            }
            self.basis[i] < self.basis[p]
        };
        let mut pick = ties[0];
        for &i in &ties[1..] {
            if lex_less(i, pick) {
                pick = i;
            }
        }
        Some(pick)
    }

    /// Solves from the installed basis, or runs phase one if none was set.
    pub fn solve(&mut self) -> LpStatus {
        if self.basis.is_empty() {
            self.install_artificials();
            let mut phase1 = vec![T::zero(); self.cols.len()];
            for c in phase1.iter_mut().take(self.n_art) {
                *c = T::zero() - T::one();
            }
            // artificials are basic at the start and may only leave
            let st = self.iterate(&phase1, false);
            if st != LpStatus::Optimal {
                self.status = Some(st);
                return st;
            }
            let infeas = self
                .basis
                .iter()
                .zip(&self.xb)
                .filter(|(j, _)| self.is_artificial(**j))
                .fold(T::zero(), |a, (_, x)| a + x.clone());
            let scale = self.rhs.iter().fold(T::one(), |a, b| if b.abs() > a { b.abs() } else { a });
            if infeas > T::feas_tol() * scale * T::from_usize(self.m).unwrap() {
                self.status = Some(LpStatus::Infeasible);
                return LpStatus::Infeasible;
            }
            self.drive_out_artificials();
        }
        let cost = self.cost.clone();
        let st = self.iterate(&cost, true);
        self.refactor();
        self.status = Some(st);
        st
    }

    fn drive_out_artificials(&mut self) {
        let ptol = T::pivot_tol();
        for r in 0..self.m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let m = self.m;
            let mut found = None;
            for j in self.n_art..self.cols.len() {
                if self.in_basis[j] {
                    continue;
                }
                let mut s = T::zero();
                for (row, v) in self.cols[j].rows.iter().zip(&self.cols[j].vals) {
                    s = s + self.binv[r * m + row].clone() * v.clone();
                }
                if s.abs() > ptol {
                    found = Some(j);
                    break;
                }
            }
            if let Some(j) = found {
                let w = self.ftran(j);
                self.pivot(r, j, &w);
            }
        }
        self.refactor();
    }

    pub fn status(&self) -> Option<LpStatus> {
        self.status
    }

    /// Primal values of the structural columns.
    pub fn primal(&self) -> Vec<T> {
        let mut x = vec![T::zero(); self.columns()];
        for (i, &j) in self.basis.iter().enumerate() {
            if !self.is_artificial(j) {
                x[j - self.n_art] = self.xb[i].clone();
            }
        }
        x
    }

    /// Row multipliers `y = c_B B^{-1}`.
    pub fn dual(&self) -> Vec<T> {
        self.duals(&self.cost)
    }

    pub fn value(&self) -> T {
        self.basis
            .iter()
            .zip(&self.xb)
            .fold(T::zero(), |a, (&j, x)| a + self.cost[j].clone() * x.clone())
    }

    /// Structural indices of the current basis (artificials omitted).
    pub fn basis(&self) -> Vec<usize> {
        self.basis.iter().filter(|&&j| !self.is_artificial(j)).map(|&j| j - self.n_art).collect()
    }

    /// Reduced cost `c_j - y·A_j` of structural column `j`.
    pub fn reduced_cost(&self, j: usize, y: &[T]) -> T {
        let jj = j + self.n_art;
        self.cost[jj].clone() - self.cols[jj].dot(y)
    }
}

/// One-shot solve of `max c·x, A x = b, x >= 0` with columns given sparse.
#[derive(Debug, Clone)]
pub struct SimplexOutcome<T> {
    pub status: LpStatus,
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub value: T,
    pub iterations: usize,
}

pub fn solve_dense_form<T: LpScalar>(
    cols: Vec<SparseCol<T>>,
    cost: Vec<T>,
    rhs: Vec<T>,
    start: Option<&[usize]>,
) -> SimplexOutcome<T> {
    // flip rows with negative right-hand side so phase one starts feasible
    let flip: Vec<bool> = rhs.iter().map(|b| *b < T::zero()).collect();
    let rhs: Vec<T> = rhs.into_iter().zip(&flip).map(|(b, &f)| if f { T::zero() - b } else { b }).collect();
    let mut s = Simplex::new(rhs);
    for (col, c) in cols.into_iter().zip(cost) {
        let vals = col
            .vals
            .into_iter()
            .zip(&col.rows)
            .map(|(v, r)| if flip[*r] { T::zero() - v } else { v })
            .collect();
        s.add_column(SparseCol { rows: col.rows, vals }, c);
    }
    if let Some(b) = start {
        if !s.set_basis(b) {
            s.basis.clear();
        }
    }
    let status = s.solve();
    let mut y = s.dual();
    for (yi, &f) in y.iter_mut().zip(&flip) {
        if f {
            *yi = T::zero() - yi.clone();
        }
    }
    SimplexOutcome { status, x: s.primal(), y, value: s.value(), iterations: s.iterations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn col(pairs: &[(usize, f64)]) -> SparseCol<f64> {
        SparseCol::from_pairs(pairs.to_vec())
    }

    // max 3x + 2y, x + y + s1 = 4, x + 3y + s2 = 6 → x = 4, value 12
    #[test]
    fn small_lp_phase_one() {
        let cols = vec![col(&[(0, 1.0), (1, 1.0)]), col(&[(0, 1.0), (1, 3.0)]), col(&[(0, 1.0)]), col(&[(1, 1.0)])];
        let out = solve_dense_form(cols, vec![3.0, 2.0, 0.0, 0.0], vec![4.0, 6.0], None);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value - 12.0).abs() < 1e-12);
        assert!((out.x[0] - 4.0).abs() < 1e-12);
        // dual: y = (3, 0); y·b = 12
        assert!((out.y[0] - 3.0).abs() < 1e-12 && out.y[1].abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        // x = -1 with x >= 0
        let out = solve_dense_form(vec![col(&[(0, 1.0)])], vec![1.0], vec![-1.0], None);
        assert_eq!(out.status, LpStatus::Infeasible);
        // max x, x - y = 0
        let out = solve_dense_form(vec![col(&[(0, 1.0)]), col(&[(0, -1.0)])], vec![1.0, 0.0], vec![0.0], None);
        assert_eq!(out.status, LpStatus::Unbounded);
    }

    #[test]
    fn exact_rational_solve() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let cols = vec![
            SparseCol::from_pairs(vec![(0, r(1, 1)), (1, r(1, 1))]),
            SparseCol::from_pairs(vec![(0, r(1, 1)), (1, r(3, 1))]),
            SparseCol::from_pairs(vec![(0, r(1, 1))]),
            SparseCol::from_pairs(vec![(1, r(1, 1))]),
        ];
        let out = solve_dense_form(cols, vec![r(1, 1), r(2, 1), r(0, 1), r(0, 1)], vec![r(4, 1), r(6, 1)], None);
        assert_eq!(out.status, LpStatus::Optimal);
        // optimum at x = 3, y = 1: value 5
        assert_eq!(out.value, r(5, 1));
        assert_eq!(out.x[0], r(3, 1));
        assert_eq!(out.x[1], r(1, 1));
        assert_eq!(out.y, vec![r(1, 2), r(1, 2)]);
    }

    #[test]
    fn redundant_row_keeps_zero_artificial() {
        // x + y = 1 twice
        let cols = vec![col(&[(0, 1.0), (1, 1.0)]), col(&[(0, 1.0), (1, 1.0)])];
        let out = solve_dense_form(cols, vec![1.0, 2.0], vec![1.0, 1.0], None);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn merges_duplicate_rows() {
        let c = SparseCol::from_pairs(vec![(3, 1.0), (1, 2.0), (3, -1.0)]);
        assert_eq!(c.rows, vec![1]);
        assert_eq!(c.vals, vec![2.0]);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's cycling example in equality form with slacks
        let cols = vec![
            col(&[(0, 0.25), (1, 0.5)]),
            col(&[(0, -8.0), (1, -12.0)]),
            col(&[(0, -1.0), (1, -0.5), (2, 1.0)]),
            col(&[(0, 9.0), (1, 3.0)]),
            col(&[(0, 1.0)]),
            col(&[(1, 1.0)]),
            col(&[(2, 1.0)]),
        ];
        let cost = vec![0.75, -20.0, 0.5, -6.0, 0.0, 0.0, 0.0];
        let out = solve_dense_form(cols, cost, vec![0.0, 0.0, 1.0], Some(&[4, 5, 6]));
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value - 1.25).abs() < 1e-12);
    }
}
