use crate::error::{Error, Result};
use crate::matching::assortativity::{assortativity_check, WEIGHT_FLOOR};
use crate::model::{GridCoupling, SkillGrid, TechnologyParams};
use crate::scalar::{lit, Real};

/// Teacher assignment `k_t` and acquired skill `k_g` per student node.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherMap<T> {
    pub k_t: Vec<T>,
    pub k_g: Vec<T>,
    /// Student nodes with mass; others inherit from the node below.
    pub has_mass: Vec<bool>,
    /// Left slopes at the top student node, fitted over `slope_window`.
    pub k_t_slope: T,
    pub k_g_slope: T,
    pub slope_window: (usize, usize),
}

/// Least-squares slope of `y` against node position over `lo..=hi`.
pub fn window_slope<T: Real>(grid: &SkillGrid<T>, y: &[T], lo: usize, hi: usize) -> T {
    let m = T::from_usize(hi - lo + 1).unwrap();
    let xs: Vec<T> = (lo..=hi).map(|i| grid.node(i)).collect();
    let xbar = xs.iter().fold(T::zero(), |s, &x| s + x) / m;
    let ybar = y[lo..=hi].iter().fold(T::zero(), |s, &v| s + v) / m;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (x, &v) in xs.iter().zip(&y[lo..=hi]) {
        sxy = sxy + (*x - xbar) * (v - ybar);
        sxx = sxx + (*x - xbar) * (*x - xbar);
    }
    if sxx > T::zero() {
        sxy / sxx
    } else {
        T::zero()
    }
}

/// Default slope window: the top quarter of student nodes, at least two.
pub fn top_window(n: usize) -> (usize, usize) {
    let w = (n / 4).max(2).min(n);
    (n - w, n - 1)
}

/// Mass-weighted teacher per student row of an assortative `ε`.
pub fn teacher_map_extract<T: Real>(
    eps: &GridCoupling<T>,
    params: &TechnologyParams<T>,
    grid: &SkillGrid<T>,
) -> Result<TeacherMap<T>> {
    let theta = params.theta;
    let report = assortativity_check(eps);
    if !report.is_assortative {
        return Err(Error::NotAssortative { violations: report.violation_count });
    }
    let n = grid.n;
    let floor = lit::<T>(WEIGHT_FLOOR);
    let mut mass = vec![T::zero(); n];
    let mut moment = vec![T::zero(); n];
    for &(a, k, w) in &eps.entries {
        if w > floor {
            mass[a] = mass[a] + w;
            moment[a] = moment[a] + w * grid.node(k);
        }
    }
    let has_mass: Vec<bool> = mass.iter().map(|&m| m > floor).collect();
    let mut k_t = vec![T::zero(); n];
    let mut last = None;
    for a in 0..n {
        if has_mass[a] {
            k_t[a] = moment[a] / mass[a];
            last = Some(k_t[a]);
        } else {
            k_t[a] = last.unwrap_or(T::zero());
        }
    }
    let k_g: Vec<T> = (0..n).map(|a| (T::one() - theta) * grid.node(a) + theta * k_t[a]).collect();
    let (lo, hi) = top_window(n);
    let (k_t_slope, k_g_slope) = if n >= 2 {
        (window_slope(grid, &k_t, lo, hi), window_slope(grid, &k_g, lo, hi))
    } else {
        (T::zero(), T::zero())
    };
    Ok(TeacherMap { k_t, k_g, has_mass, k_t_slope, k_g_slope, slope_window: (lo, hi) })
}
