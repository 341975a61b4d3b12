//! Grid measures, couplings, density discretization and push-forward.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::grid::SkillGrid;
use crate::model::params::TechnologyParams;
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure<T> {
    pub weights: Vec<T>,
    pub mass: T,
}

impl<T: Real> GridMeasure<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidDensity(format!("negative or non-finite weight at node {i}")));
        }
        Ok(Self::from_weights_unchecked(weights))
    }

    /// Builds a measure from weights that are known to be non-negative.
    pub fn from_weights_unchecked(weights: Vec<T>) -> Self {
        let mass = weights.iter().fold(T::zero(), |a, &w| a + w);
        GridMeasure { weights, mass }
    }

    pub fn zeros(n: usize) -> Self {
        GridMeasure { weights: vec![T::zero(); n], mass: T::zero() }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `μ(f) = Σ f_i μ_i`.
    pub fn integrate(&self, f: &[T]) -> T {
        self.weights.iter().zip(f).fold(T::zero(), |a, (&w, &x)| a + w * x)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::from_weights_unchecked(self.weights.iter().map(|&w| w * s).collect())
    }

    /// Mass of `[k_top - len, k_top]`, treating node `i` as the cell
    /// `[x_i, x_i + h)` with its weight spread uniformly.
    pub fn top_window(&self, grid: &SkillGrid<T>, len: T) -> T {
        let lo = grid.k_top - len;
        let mut total = T::zero();
        for (i, &w) in self.weights.iter().enumerate().rev() {
            let a = grid.node(i);
            let b = a + grid.h;
            if b <= lo {
                break;
            }
            let covered = (b - a.max(lo)) / grid.h;
            total = total + w * covered.min(T::one());
        }
        total
    }

    pub fn support(&self, floor: T) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > floor).collect()
    }
}

/// Sparse non-negative coupling on the grid square.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCoupling<T> {
    pub n: usize,
    pub entries: Vec<(usize, usize, T)>,
}

impl<T: Real> GridCoupling<T> {
    pub fn new(n: usize, entries: Vec<(usize, usize, T)>) -> Result<Self> {
        for &(r, c, w) in &entries {
            if r >= n || c >= n {
                return Err(Error::GridMismatch { expected: n, got: r.max(c) + 1 });
            }
            if !(w >= T::zero()) {
                return Err(Error::InvalidDensity(format!("negative coupling weight at ({r}, {c})")));
            }
        }
        Ok(GridCoupling { n, entries })
    }

    pub fn diagonal(m: &GridMeasure<T>) -> Self {
        GridCoupling {
            n: m.len(),
            entries: m.weights.iter().enumerate().filter(|(_, w)| **w > T::zero()).map(|(i, &w)| (i, i, w)).collect(),
        }
    }

    pub fn row_marginal(&self) -> GridMeasure<T> {
        let mut w = vec![T::zero(); self.n];
        for &(r, _, x) in &self.entries {
            w[r] = w[r] + x;
        }
        GridMeasure::from_weights_unchecked(w)
    }

    pub fn col_marginal(&self) -> GridMeasure<T> {
        let mut w = vec![T::zero(); self.n];
        for &(_, c, x) in &self.entries {
            w[c] = w[c] + x;
        }
        GridMeasure::from_weights_unchecked(w)
    }

    pub fn mass(&self) -> T {
        self.entries.iter().fold(T::zero(), |a, e| a + e.2)
    }

    /// `Σ w_{rc} f(r, c)`.
    pub fn integrate(&self, f: impl Fn(usize, usize) -> T) -> T {
        self.entries.iter().fold(T::zero(), |a, &(r, c, w)| a + w * f(r, c))
    }

    /// Entries above `floor`.
    pub fn support(&self, floor: T) -> Vec<(usize, usize, T)> {
        self.entries.iter().copied().filter(|e| e.2 > floor).collect()
    }

    /// Dense `n x n` matrix, for small instances and comparisons.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut m = vec![vec![T::zero(); self.n]; self.n];
        for &(r, c, w) in &self.entries {
            m[r][c] = m[r][c] + w;
        }
        m
    }
}

/// Density on `[0, k_top)` to be binned onto the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec<T> {
    Uniform,
    /// `intercept + slope * x`.
    Linear { intercept: T, slope: T },
    /// Piecewise-linear through `(knot, value)` pairs; constant beyond the ends.
    Tabulated { knots: Vec<T>, values: Vec<T> },
}

impl<T: Real> DensitySpec<T> {
    fn check(&self, k_top: T) -> Result<()> {
        match self {
            DensitySpec::Uniform => Ok(()),
            DensitySpec::Linear { intercept, slope } => {
                let end = *intercept + *slope * k_top;
                if *intercept < T::zero() || end < T::zero() {
                    return Err(Error::InvalidDensity("linear density negative on [0, k_top)".into()));
                }
                Ok(())
            }
            DensitySpec::Tabulated { knots, values } => {
                if knots.is_empty() || knots.len() != values.len() {
                    return Err(Error::InvalidDensity("tabulated density needs matching knots and values".into()));
                }
                if let Some(i) = values.iter().position(|v| !(*v >= T::zero())) {
                    return Err(Error::InvalidDensity(format!("negative density sample at knot {i}")));
                }
                if knots.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidDensity("density knots must increase".into()));
                }
                Ok(())
            }
        }
    }

    fn eval_tab(knots: &[T], values: &[T], x: T) -> T {
        if x <= knots[0] {
            return values[0];
        }
        let last = knots.len() - 1;
        if x >= knots[last] {
            return values[last];
        }
        let i = knots.partition_point(|&k| k <= x) - 1;
        let t = (x - knots[i]) / (knots[i + 1] - knots[i]);
        values[i] + t * (values[i + 1] - values[i])
    }

    /// Exact integral over `[lo, hi]`.
    pub fn bin_mass(&self, lo: T, hi: T) -> T {
        let half = lit::<T>(0.5);
        match self {
            DensitySpec::Uniform => hi - lo,
            DensitySpec::Linear { intercept, slope } => *intercept * (hi - lo) + half * *slope * (hi * hi - lo * lo),
            DensitySpec::Tabulated { knots, values } => {
                let mut pts = vec![lo];
                pts.extend(knots.iter().copied().filter(|&k| k > lo && k < hi));
                pts.push(hi);
                pts.windows(2).fold(T::zero(), |acc, w| {
                    let f0 = Self::eval_tab(knots, values, w[0]);
                    let f1 = Self::eval_tab(knots, values, w[1]);
                    acc + half * (f0 + f1) * (w[1] - w[0])
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretized<T> {
    pub measure: GridMeasure<T>,
    /// Raw mass before renormalization.
    pub raw_mass: T,
    pub warning: Option<String>,
}

/// Bins the density cell by cell and renormalizes to unit mass.
pub fn discretize_density<T: Real>(density: &DensitySpec<T>, grid: &SkillGrid<T>) -> Result<Discretized<T>> {
    density.check(grid.k_top)?;
    let weights: Vec<T> = (0..grid.n).map(|i| density.bin_mass(grid.node(i), grid.node(i) + grid.h)).collect();
    let raw_mass = weights.iter().fold(T::zero(), |a, &w| a + w);
    if !(raw_mass > T::zero()) {
        return Err(Error::InvalidDensity("zero total mass".into()));
    }
    if !(weights[grid.n - 1] > T::zero()) {
        return Err(Error::InvalidDensity("zero weight at the top node".into()));
    }
    let warning = if (raw_mass - T::one()).abs() > lit(1e-6) {
        Some(format!("density renormalized by factor {}", to_f64(&(T::one() / raw_mass))))
    } else {
        None
    };
    let measure = GridMeasure::from_weights_unchecked(weights.into_iter().map(|w| w / raw_mass).collect());
    Ok(Discretized { measure, raw_mass, warning })
}

/// `κ = z_# ε` with linear splitting between bracketing nodes.
pub fn pushforward_z<T: Real>(eps: &GridCoupling<T>, params: &TechnologyParams<T>, grid: &SkillGrid<T>) -> GridMeasure<T> {
    let mut w = vec![T::zero(); grid.n];
    for &(a, k, x) in &eps.entries {
        let s = grid.split_pair(a, k, params.theta);
        w[s.lo] = w[s.lo] + s.w_lo() * x;
        if s.w_hi > T::zero() {
            w[s.hi] = w[s.hi] + s.w_hi * x;
        }
    }
    GridMeasure::from_weights_unchecked(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    pub passes: bool,
    pub c_hat: f64,
    /// `(Δ, ratio)` per dyadic window.
    pub ratios: Vec<(f64, f64)>,
    pub failed_window: Option<f64>,
}

/// Ratios `α[ā-2Δ, ā] / α[ā-Δ, ā]` over `Δ = h, 2h, …, k̄/2`.
pub fn doubling_check<T: Real>(alpha: &GridMeasure<T>, grid: &SkillGrid<T>) -> DoublingReport {
    let mut ratios = Vec::new();
    let mut c_hat = 1.0f64;
    let mut m = 1usize;
    while 2 * m <= grid.n {
        let delta = grid.h * T::from_usize(m).unwrap();
        let inner = alpha.top_window(grid, delta);
        let outer = alpha.top_window(grid, delta + delta);
        if !(inner > T::zero()) {
            return DoublingReport { passes: false, c_hat: f64::INFINITY, ratios, failed_window: Some(to_f64(&delta)) };
        }
        let r = to_f64(&(outer / inner));
        c_hat = c_hat.max(r);
        ratios.push((to_f64(&delta), r));
        m *= 2;
    }
    DoublingReport { passes: true, c_hat, ratios, failed_window: None }
}
