//! Utility curves b_E and b_L.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::grid::SkillGrid;
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    /// `p0 * exp(p1 * k) + p2`
    Exponential,
    /// `p0 + p1 * k + p2 * k^2 / 2`
    QuadraticPlus,
    /// Cubic Hermite through `(knot, value, slope)` triples stored flat.
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityCurve<T> {
    pub kind: CurveKind,
    pub parameters: Vec<T>,
    pub domain_top: T,
}

impl<T: Real> UtilityCurve<T> {
    /// `b(k) = e^k` on `[0, k_top]`.
    pub fn exponential(k_top: T) -> Self {
        Self::exponential_with(T::one(), T::one(), T::zero(), k_top)
    }

    pub fn exponential_with(scale: T, rate: T, offset: T, k_top: T) -> Self {
        UtilityCurve {
            kind: CurveKind::Exponential,
            parameters: vec![scale, rate, offset],
            domain_top: k_top,
        }
    }

    pub fn quadratic_plus(p0: T, p1: T, p2: T, k_top: T) -> Self {
        UtilityCurve {
            kind: CurveKind::QuadraticPlus,
            parameters: vec![p0, p1, p2],
            domain_top: k_top,
        }
    }

    /// Tabulated curve; knots must be strictly increasing and cover `[0, k_top]`.
    /// Slopes must bracket every secant, which is what a convex C¹ curve
    /// sampled exactly produces.
    pub fn tabulated(knots: &[T], values: &[T], slopes: &[T], k_top: T) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() || knots.len() != slopes.len() {
            return Err(Error::InvalidCurve(
                "tabulated curve needs at least two knots with matching value and slope samples".into(),
            ));
        }
        if knots[0] > T::zero() || knots[knots.len() - 1] < k_top {
            return Err(Error::InvalidCurve("knots must cover [0, k_top]".into()));
        }
        let slack = lit::<T>(1e-9);
        for i in 0..knots.len() - 1 {
            let dx = knots[i + 1] - knots[i];
            if !(dx > T::zero()) {
                return Err(Error::InvalidCurve(format!("knots not increasing at node {}", i + 1)));
            }
            let secant = (values[i + 1] - values[i]) / dx;
            let scale = T::one().max(secant.abs());
            if secant < slopes[i] - slack * scale || secant > slopes[i + 1] + slack * scale {
                return Err(Error::InvalidCurve(format!(
                    "slope samples inconsistent with values at node {i}: secant {} not in [{}, {}]",
                    secant,
                    slopes[i],
                    slopes[i + 1]
                )));
            }
        }
        let mut parameters = Vec::with_capacity(3 * knots.len());
        for i in 0..knots.len() {
            parameters.extend_from_slice(&[knots[i], values[i], slopes[i]]);
        }
        Ok(UtilityCurve {
            kind: CurveKind::Tabulated,
            parameters,
            domain_top: k_top,
        })
    }

    fn param(&self, i: usize) -> T {
        self.parameters.get(i).copied().unwrap_or_else(T::zero)
    }

    /// Hermite segment containing `k` and the local coordinate.
    fn segment(&self, k: T) -> (usize, T, T) {
        let m = self.parameters.len() / 3;
        let knot = |i: usize| self.parameters[3 * i];
        let mut lo = 0;
        let mut hi = m - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if knot(mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let dx = knot(lo + 1) - knot(lo);
        (lo, (k - knot(lo)) / dx, dx)
    }

    /// Returns `(b, b', b'')` at `k`.
    pub fn eval3(&self, k: T) -> (T, T, T) {
        match self.kind {
            CurveKind::Exponential => {
                let (p0, p1, p2) = (self.param(0), self.param(1), self.param(2));
                let e = p0 * (p1 * k).exp();
                (e + p2, e * p1, e * p1 * p1)
            }
            CurveKind::QuadraticPlus => {
                let (p0, p1, p2) = (self.param(0), self.param(1), self.param(2));
                let half = lit::<T>(0.5);
                (p0 + p1 * k + half * p2 * k * k, p1 + p2 * k, p2)
            }
            CurveKind::Tabulated => {
                let (i, t, dx) = self.segment(k);
                let p = &self.parameters;
                let (y0, m0) = (p[3 * i + 1], p[3 * i + 2] * dx);
                let (y1, m1) = (p[3 * i + 4], p[3 * i + 5] * dx);
                let (two, three, four, six) = (lit::<T>(2.0), lit::<T>(3.0), lit::<T>(4.0), lit::<T>(6.0));
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = two * t3 - three * t2 + T::one();
                let h10 = t3 - two * t2 + t;
                let h01 = -two * t3 + three * t2;
                let h11 = t3 - t2;
                let value = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
                let d00 = six * t2 - six * t;
                let d10 = three * t2 - four * t + T::one();
                let d11 = three * t2 - two * t;
                let slope = (d00 * y0 + d10 * m0 - d00 * y1 + d11 * m1) / dx;
                let s00 = lit::<T>(12.0) * t - six;
                let s10 = six * t - four;
                let s11 = six * t - two;
                let curv = (s00 * y0 + s10 * m0 - s00 * y1 + s11 * m1) / (dx * dx);
                (value, slope, curv)
            }
        }
    }

    pub fn value(&self, k: T) -> T {
        self.eval3(k).0
    }

    pub fn slope(&self, k: T) -> T {
        self.eval3(k).1
    }

    pub fn curvature(&self, k: T) -> T {
        self.eval3(k).2
    }
}

/// Lower bounds and top slope of a curve sampled on the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilityReport {
    pub value_at_zero: f64,
    pub slope_at_zero: f64,
    pub min_curvature: f64,
    pub min_slope: f64,
    pub max_slope: f64,
    pub passes: bool,
    pub failure: Option<String>,
}

/// Checks `b(0) > 0`, `b'(0) > 0` and `inf b'' > 0` on the grid nodes and `k̄`.
pub fn validate_utility<T: Real>(curve: &UtilityCurve<T>, grid: &SkillGrid<T>) -> UtilityReport {
    let (b0, d0, _) = curve.eval3(T::zero());
    let mut points: Vec<T> = grid.nodes();
    points.push(grid.k_top);
    if curve.kind == CurveKind::Tabulated {
        points.extend(curve.parameters.chunks(3).map(|c| c[0]).filter(|&k| k <= grid.k_top));
    }
    let mut min_curv = T::infinity();
    let mut min_slope = T::infinity();
    let mut finite = true;
    for &k in &points {
        let (b, d, dd) = curve.eval3(k);
        finite &= b.is_finite() && d.is_finite() && dd.is_finite();
        min_curv = min_curv.min(dd);
        min_slope = min_slope.min(d);
    }
    let top_slope = curve.slope(grid.k_top);
    let failure = if !finite {
        Some("non-finite curve value on the grid".to_string())
    } else if !(b0 > T::zero()) {
        Some(format!("b(0) = {b0} is not strictly positive"))
    } else if !(d0 > T::zero()) {
        Some(format!("b'(0) = {d0} is not strictly positive"))
    } else if !(min_curv > T::zero()) {
        Some(format!("inf b'' = {min_curv} is not strictly positive"))
    } else {
        None
    };
    UtilityReport {
        value_at_zero: to_f64(&b0),
        slope_at_zero: to_f64(&d0),
        min_curvature: to_f64(&min_curv),
        min_slope: to_f64(&min_slope),
        max_slope: to_f64(&top_slope),
        passes: failure.is_none(),
        failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_passes_with_unit_bounds() {
        let grid = SkillGrid::new(64, 1.0).unwrap();
        let r = validate_utility(&UtilityCurve::exponential(1.0), &grid);
        assert!(r.passes);
        assert_eq!(r.value_at_zero, 1.0);
        assert_eq!(r.slope_at_zero, 1.0);
        assert_relative_eq!(r.min_curvature, 1.0);
        assert_relative_eq!(r.max_slope, std::f64::consts::E);
    }

    #[test]
    fn linear_curve_fails_on_curvature() {
        let grid = SkillGrid::new(8, 1.0).unwrap();
        let r = validate_utility(&UtilityCurve::quadratic_plus(1.0, 1.0, 0.0, 1.0), &grid);
        assert!(!r.passes);
        assert_eq!(r.min_curvature, 0.0);
        assert!(r.failure.unwrap().contains("b''"));
    }

    #[test]
    fn shifted_exponential_fails_on_value() {
        let grid = SkillGrid::new(8, 1.0).unwrap();
        let r = validate_utility(&UtilityCurve::exponential_with(1.0, 1.0, -2.0, 1.0), &grid);
        assert!(!r.passes);
        assert_eq!(r.value_at_zero, -1.0);
    }

    #[test]
    fn tabulated_exponential_tracks_closed_form() {
        let knots: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let vals: Vec<f64> = knots.iter().map(|k| k.exp()).collect();
        let curve = UtilityCurve::tabulated(&knots, &vals, &vals, 1.0).unwrap();
        for i in 0..100 {
            let k = i as f64 / 100.0;
            assert_relative_eq!(curve.value(k), k.exp(), max_relative = 1e-6);
            assert_relative_eq!(curve.slope(k), k.exp(), max_relative = 1e-3);
        }
        let grid = SkillGrid::new(16, 1.0).unwrap();
        assert!(validate_utility(&curve, &grid).passes);
    }

    #[test]
    fn tabulated_rejects_inconsistent_slopes() {
        let knots = [0.0, 0.5, 1.0];
        let vals = [1.0, 2.0, 3.0];
        let slopes = [0.1, 0.1, 0.1];
        let err = UtilityCurve::tabulated(&knots, &vals, &slopes, 1.0).unwrap_err();
        assert!(err.to_string().contains("node 0"));
    }

    #[test]
    fn quadratic_derivatives() {
        let c = UtilityCurve::quadratic_plus(1.0, 2.0, 4.0, 1.0);
        assert_eq!(c.eval3(0.5), (1.0 + 1.0 + 0.5, 4.0, 4.0));
    }

    #[test]
    fn single_precision_exponential() {
        let c = UtilityCurve::<f32>::exponential(1.0);
        assert!((c.value(0.5) - 0.5f32.exp()).abs() < 1e-6);
    }
}
