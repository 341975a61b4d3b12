use serde::Serialize;

use crate::error::{Error, Result};
use crate::matching::{assortativity_check, window_slope, OccupationSplit, TeacherMap, WEIGHT_FLOOR};
use crate::model::{GridCoupling, SkillGrid, TechnologyParams};
use crate::scalar::{to_f64, Real};

/// Fewest forward differences a power-law fit is attempted on.
pub const MIN_FIT_NODES: usize = 8;
/// Top window, in nodes, for the measured density ratio.
pub const DENSITY_WINDOW: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "N_theta>1")]
    Divergent,
    #[serde(rename = "N_theta=1")]
    Critical,
    #[serde(rename = "N_theta<1")]
    Bounded,
}

impl Regime {
    pub fn of(n_theta: f64) -> Self {
        if (n_theta - 1.0).abs() < 1e-12 {
            Regime::Critical
        } else if n_theta > 1.0 {
            Regime::Divergent
        } else {
            Regime::Bounded
        }
    }
}

/// Diagnostics for the standing hypotheses of the asymptotics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseFlags {
    /// (i) the top node teaches and carries no worker or manager mass.
    pub top_teacher_only: bool,
    /// (ii) ε is positive assortative.
    pub eps_assortative: bool,
    /// (iii) the fitted top slope of `k_t` agrees within 25% over the top
    /// quarter and the top eighth of student nodes.
    pub kt_slope_stable: bool,
    /// (iv) `v'` is positive and non-decreasing on the top quarter.
    pub vprime_monotone: bool,
}

impl PhaseFlags {
    pub fn all(&self) -> bool {
        self.top_teacher_only && self.eps_assortative && self.kt_slope_stable && self.vprime_monotone
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    /// Forward-difference indices `lo..=hi`.
    pub window: (usize, usize),
    pub nodes: usize,
    /// Least-squares exponent of `log v'` against `-log Δk`.
    pub exponent: f64,
    /// Same fit on `log(v' + c b̄'_E / (1 - 1/(Nθ)))`.
    pub exponent_offset_corrected: f64,
    /// Root-mean-square residual of the first fit.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopSlopes {
    pub k_t_slope: f64,
    pub k_g_slope: f64,
    pub predicted_k_t: f64,
    pub predicted_k_g: f64,
    pub k_t_rel_error: f64,
    pub k_g_rel_error: f64,
    /// `|N k_t' - k_g'| / k_g'`
    pub identity_rel_error: f64,
    pub window: (usize, usize),
}

/// One point of the top-quarter gradient profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientPoint {
    pub node: usize,
    pub dk: f64,
    pub v_prime: f64,
    /// `log(k̄/Δk) / log N`, the pyramid depth at this distance.
    pub log_depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReport {
    pub regime: Regime,
    pub n_theta: f64,
    /// `log(Nθ)/log N`; absent when `N = 1`.
    pub predicted_exponent: Option<f64>,
    pub fitted_exponent: Option<f64>,
    pub fit: Option<ExponentFit>,
    pub fit_declined: Option<String>,
    /// `c b̄'_E / (1/(Nθ) - 1)`, only for `Nθ < 1`.
    pub predicted_limit_slope: Option<f64>,
    /// `v'` at the top forward difference, only for `Nθ < 1`.
    pub fitted_limit_slope: Option<f64>,
    pub density_ratio_measured: f64,
    pub density_ratio_predicted: f64,
    pub density_window: usize,
    pub top_slopes: Option<TopSlopes>,
    pub flags: PhaseFlags,
    pub gradient: Vec<GradientPoint>,
}

/// `(1-θ/N)/(1-θ)`
pub fn predicted_density_ratio<T: Real>(params: &TechnologyParams<T>) -> f64 {
    let (th, n) = (to_f64(&params.theta), to_f64(&params.n_students));
    (1.0 - th / n) / (1.0 - th)
}

/// `log(Nθ)/log N`, or `None` at `N = 1`.
pub fn predicted_exponent<T: Real>(params: &TechnologyParams<T>) -> Option<f64> {
    let n = to_f64(&params.n_students);
    (n > 1.0).then(|| to_f64(&params.n_theta()).ln() / n.ln())
}

fn max_slope_e<T: Real>(params: &TechnologyParams<T>, grid: &SkillGrid<T>) -> f64 {
    grid.nodes()
        .into_iter()
        .chain(std::iter::once(grid.k_top))
        .map(|k| to_f64(&params.b_e.slope(k)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `c b̄'_E / (1/(Nθ) - 1)`
pub fn predicted_limit_slope<T: Real>(params: &TechnologyParams<T>, grid: &SkillGrid<T>) -> f64 {
    let nth = to_f64(&params.n_theta());
    to_f64(&params.c) * max_slope_e(params, grid) / (1.0 / nth - 1.0)
}

/// Top slopes of `k_t` and `k_g` against `(1-θ)/(N-θ)` and `(1-θ)/(1-θ/N)`.
pub fn top_slopes<T: Real>(tmap: &TeacherMap<T>, split: &OccupationSplit<T>, params: &TechnologyParams<T>) -> Result<TopSlopes> {
    let top = split.kappa.len() - 1;
    let floor = crate::scalar::lit::<T>(WEIGHT_FLOOR);
    if !(split.kappa_t.weights[top] > floor) {
        return Err(Error::Declined("top node carries no teachers".into()));
    }
    let (th, n) = (to_f64(&params.theta), to_f64(&params.n_students));
    let kt = to_f64(&tmap.k_t_slope);
    let kg = to_f64(&tmap.k_g_slope);
    let pt = (1.0 - th) / (n - th);
    let pg = (1.0 - th) / (1.0 - th / n);
    Ok(TopSlopes {
        k_t_slope: kt,
        k_g_slope: kg,
        predicted_k_t: pt,
        predicted_k_g: pg,
        k_t_rel_error: (kt - pt).abs() / pt,
        k_g_rel_error: (kg - pg).abs() / pg,
        identity_rel_error: (n * kt - kg).abs() / kg.abs(),
        window: tmap.slope_window,
    })
}

fn lsq(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    (slope, icpt, (rss / m).sqrt())
}

/// Wage-gradient asymptotics near the top skill.
///
/// `v'` is the forward difference `(v_{i+1} - v_i)/h`, read at distance
/// `Δk = (n-1-i)h` from `k̄` with nodes taken as cell midpoints. For `Nθ > 1`
/// the exponent is fitted over forward differences in the top eighth of the
/// grid that lie strictly above every worker and manager node, leaving out
/// the two top nodes.
pub fn phase_fit<T: Real>(
    v: &[T],
    eps: &GridCoupling<T>,
    split: &OccupationSplit<T>,
    tmap: Option<&TeacherMap<T>>,
    params: &TechnologyParams<T>,
    grid: &SkillGrid<T>,
) -> PhaseReport {
    let n = grid.n;
    let h = to_f64(&grid.h);
    let floor = crate::scalar::lit::<T>(WEIGHT_FLOOR);
    let nth = to_f64(&params.n_theta());
    let regime = Regime::of(nth);
    let c = to_f64(&params.c);
    let big_n = to_f64(&params.n_students);

    let v: Vec<f64> = v.iter().map(to_f64).collect();
    let quarter = n.saturating_sub((n / 4).max(2));
    let gradient: Vec<GradientPoint> = (quarter..n.saturating_sub(1))
        .map(|i| {
            let dk = (n - 1 - i) as f64 * h;
            GradientPoint {
                node: i,
                dk,
                v_prime: (v[i + 1] - v[i]) / h,
                log_depth: if big_n > 1.0 { (to_f64(&grid.k_top) / dk).ln() / big_n.ln() } else { 0.0 },
            }
        })
        .collect();

    let top = n - 1;
    let labor_top = split.top_labor_node(floor);
    let scale = gradient.iter().fold(1.0f64, |m, g| m.max(g.v_prime.abs()));
    let flags = PhaseFlags {
        top_teacher_only: split.kappa_t.weights[top] > floor && !(split.labor_at(top) > floor),
        eps_assortative: assortativity_check(eps).is_assortative,
        kt_slope_stable: tmap.map_or(false, |t| {
            let (lo, hi) = t.slope_window;
            let eighth = (hi + 1 - (hi + 1 - lo) / 2).min(hi.saturating_sub(1));
            let s8 = to_f64(&window_slope(grid, &t.k_t, eighth, hi));
            let s4 = to_f64(&t.k_t_slope);
            s4 > 0.0 && (s8 - s4).abs() <= 0.25 * s4
        }),
        vprime_monotone: gradient.iter().all(|g| g.v_prime > 0.0)
            && gradient.windows(2).all(|w| w[1].v_prime >= w[0].v_prime - 1e-9 * scale),
    };

    let density_window = DENSITY_WINDOW.min(n);
    let len = grid.h * T::from_usize(density_window).unwrap();
    let density_ratio_measured = to_f64(&split.kappa.top_window(grid, len)) / to_f64(&split.students.top_window(grid, len));

    let mut report = PhaseReport {
        regime,
        n_theta: nth,
        predicted_exponent: predicted_exponent(params),
        fitted_exponent: None,
        fit: None,
        fit_declined: None,
        predicted_limit_slope: None,
        fitted_limit_slope: None,
        density_ratio_measured,
        density_ratio_predicted: predicted_density_ratio(params),
        density_window,
        top_slopes: tmap.and_then(|t| top_slopes(t, split, params).ok()),
        flags,
        gradient,
    };

    match regime {
        Regime::Bounded => {
            report.predicted_limit_slope = Some(predicted_limit_slope(params, grid));
            report.fitted_limit_slope = report.gradient.last().map(|g| g.v_prime);
        }
        Regime::Critical => {
            report.fit_declined = Some("critical regime: no power law, see the gradient against log depth".into());
        }
        Regime::Divergent => {
            let lo = (n - n / 8).max(labor_top.map_or(0, |l| l + 1));
            let hi = n.saturating_sub(4);
            let offset = c * max_slope_e(params, grid) / (1.0 - 1.0 / nth);
            let pts: Vec<&GradientPoint> =
                report.gradient.iter().filter(|g| g.node >= lo && g.node <= hi && g.v_prime > 0.0).collect();
            if pts.len() < MIN_FIT_NODES {
                report.fit_declined = Some(format!(
                    "{} usable forward differences above the top worker/manager node (need {MIN_FIT_NODES})",
                    pts.len()
                ));
            } else {
                let x: Vec<f64> = pts.iter().map(|g| -g.dk.ln()).collect();
                let y: Vec<f64> = pts.iter().map(|g| g.v_prime.ln()).collect();
                let y2: Vec<f64> = pts.iter().map(|g| (g.v_prime + offset).ln()).collect();
                let (slope, _, residual) = lsq(&x, &y);
                let (slope2, _, _) = lsq(&x, &y2);
                report.fitted_exponent = Some(slope);
                report.fit = Some(ExponentFit {
                    window: (pts[0].node, pts[pts.len() - 1].node),
                    nodes: pts.len(),
                    exponent: slope,
                    exponent_offset_corrected: slope2,
                    residual,
                });
            }
        }
    }
    report
}
