//! Scenario files: TOML with one table per concern.
//!
//! Every scalar keeps its source span so validation failures can point at
//! the offending line.

use std::collections::HashMap;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use pyramid_core::model::{discretize_density, validate_utility, DensitySpec, SkillGrid, TechnologyParams, UtilityCurve};
use pyramid_core::{Config, Curve, Density, Error, Grid, Measure, Params};
use serde::Deserialize;
use toml::Spanned;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    grid_n: Option<Spanned<i64>>,
    seed: Option<Spanned<i64>>,
    params: Option<RawParams>,
    alpha: Option<Spanned<RawAlpha>>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    outputs: RawOutputs,
    probe: Option<RawProbe>,
    gurus: Option<RawGurus>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    theta: Spanned<f64>,
    theta_prime: Spanned<f64>,
    n_students: Spanned<f64>,
    n_workers: Spanned<f64>,
    c: Spanned<f64>,
    k_top: Option<Spanned<f64>>,
    b_e: Option<Spanned<RawCurve>>,
    b_l: Option<Spanned<RawCurve>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawCurve {
    Exponential {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        rate: f64,
        #[serde(default)]
        offset: f64,
    },
    QuadraticPlus {
        p0: f64,
        p1: f64,
        p2: f64,
    },
    Tabulated {
        file: String,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawAlpha {
    Uniform,
    Linear { intercept: f64, slope: f64 },
    Tabulated { file: String },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    delta: Option<Spanned<f64>>,
    c_delta: Option<Spanned<f64>>,
    tol: Option<Spanned<f64>>,
    max_iter: Option<Spanned<i64>>,
    damping: Option<Spanned<f64>>,
    delta_factor: Option<Spanned<f64>>,
    delta_floor: Option<Spanned<f64>>,
    bellman_budget: Option<Spanned<i64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    dir: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbe {
    amplitude: Spanned<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGurus {
    n: Spanned<i64>,
    n_prime: Spanned<i64>,
    population: Spanned<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    n_students: Spanned<Vec<f64>>,
    theta: Spanned<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid_n: Option<usize>,
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GuruSpec {
    pub n: u64,
    pub n_prime: u64,
    pub population: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_students: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Economy ready to solve.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: Params,
    pub grid: Grid,
    pub alpha: Measure,
    pub density: Density,
    pub alpha_warning: Option<String>,
    pub solver: Config,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub path: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub model: Option<Model>,
    pub probe_amplitude: Option<f64>,
    pub gurus: Option<GuruSpec>,
    pub sweep: Option<SweepSpec>,
}

impl Scenario {
    pub fn model(&self) -> Result<&Model, CliError> {
        self.model.as_ref().ok_or_else(|| CliError::Config {
            file: self.path.clone(),
            line: None,
            message: "missing [params] table or grid_n".into(),
        })
    }
}

struct Source<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Source<'_> {
    fn line(&self, span: &Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())].matches('\n').count() + 1
    }

    fn err(&self, span: Option<&Range<usize>>, message: impl Into<String>) -> CliError {
        CliError::Config { file: self.path.to_path_buf(), line: span.map(|s| self.line(s)), message: message.into() }
    }

    fn relative(&self, file: &str) -> PathBuf {
        let p = PathBuf::from(file);
        if p.is_absolute() {
            p
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }

    fn read_csv(&self, span: &Range<usize>, file: &str, columns: usize) -> Result<Vec<Vec<f64>>, CliError> {
        let path = self.relative(file);
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(&path)
            .map_err(|e| self.err(Some(span), format!("{}: {e}", path.display())))?;
        let mut cols = vec![Vec::new(); columns];
        for (row, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| self.err(Some(span), format!("{}: {e}", path.display())))?;
            if rec.len() != columns {
                return Err(self.err(
                    Some(span),
                    format!("{} row {}: expected {columns} columns, got {}", path.display(), row + 2, rec.len()),
                ));
            }
            for (c, field) in rec.iter().enumerate() {
                let x: f64 = field.parse().map_err(|_| {
                    self.err(Some(span), format!("{} row {}: `{field}` is not a number", path.display(), row + 2))
                })?;
                cols[c].push(x);
            }
        }
        Ok(cols)
    }
}

/// Reads and validates a scenario file.
pub fn load(path: &Path, overrides: &Overrides) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config { file: path.to_path_buf(), line: None, message: e.to_string() })?;
    let src = Source { path, text: &text };
    let raw: RawScenario = toml::from_str(&text).map_err(|e| src.err(e.span().as_ref(), e.message()))?;

    let seed = match &raw.seed {
        Some(s) if *s.get_ref() < 0 => return Err(src.err(Some(&s.span()), "seed must be non-negative")),
        Some(s) => *s.get_ref() as u64,
        None => 0,
    };
    let out_dir = match (&overrides.out, &raw.outputs.dir) {
        (Some(o), _) => o.clone(),
        (None, Some(d)) => src.relative(d),
        (None, None) => src.relative("out"),
    };
    let model = match (&raw.params, &raw.grid_n) {
        (Some(p), Some(g)) => Some(build_model(&src, &raw, p, g, overrides)?),
        (Some(_), None) => return Err(src.err(None, "grid_n is required alongside [params]")),
        _ => None,
    };
    let probe_amplitude = match &raw.probe {
        Some(p) => {
            let a = *p.amplitude.get_ref();
            if !(a > 0.0 && a.is_finite()) {
                return Err(src.err(Some(&p.amplitude.span()), format!("probe amplitude {a} must be positive")));
            }
            Some(a)
        }
        None => None,
    };
    let gurus = match &raw.gurus {
        Some(g) => {
            let pos = |s: &Spanned<i64>, name: &str, min: i64| {
                if *s.get_ref() < min {
                    Err(src.err(Some(&s.span()), format!("{name} = {} violates {name} >= {min}", s.get_ref())))
                } else {
                    Ok(*s.get_ref() as u64)
                }
            };
            Some(GuruSpec {
                n: pos(&g.n, "n", 2)?,
                n_prime: pos(&g.n_prime, "n_prime", 1)?,
                population: pos(&g.population, "population", 1)?,
            })
        }
        None => None,
    };
    let sweep = match &raw.sweep {
        Some(s) => {
            if s.n_students.get_ref().is_empty() || s.theta.get_ref().is_empty() {
                return Err(src.err(Some(&s.n_students.span()), "sweep lattice must be non-empty"));
            }
            if let Some(m) = &model {
                for &n in s.n_students.get_ref() {
                    for &t in s.theta.get_ref() {
                        let mut p = m.params.clone();
                        p.n_students = n;
                        p.theta = t;
                        p.validate().map_err(|e| src.err(Some(&s.n_students.span()), format!("sweep point: {e}")))?;
                    }
                }
            }
            Some(SweepSpec { n_students: s.n_students.get_ref().clone(), theta: s.theta.get_ref().clone() })
        }
        None => None,
    };
    Ok(Scenario { path: path.to_path_buf(), out_dir, seed, model, probe_amplitude, gurus, sweep })
}

fn build_model(
    src: &Source,
    raw: &RawScenario,
    p: &RawParams,
    grid_n: &Spanned<i64>,
    overrides: &Overrides,
) -> Result<Model, CliError> {
    let mut spans: HashMap<&'static str, Range<usize>> = HashMap::new();
    spans.insert("theta", p.theta.span());
    spans.insert("theta_prime", p.theta_prime.span());
    spans.insert("N", p.n_students.span());
    spans.insert("N_prime", p.n_workers.span());
    spans.insert("c", p.c.span());
    if let Some(k) = &p.k_top {
        spans.insert("k_top", k.span());
    }
    let k_top = p.k_top.as_ref().map_or(1.0, |k| *k.get_ref());

    let n = match overrides.grid_n {
        Some(n) => n,
        None if *grid_n.get_ref() >= 1 => *grid_n.get_ref() as usize,
        None => return Err(src.err(Some(&grid_n.span()), format!("grid_n = {} violates grid_n >= 1", grid_n.get_ref()))),
    };
    let grid: Grid = SkillGrid::new(n, k_top).map_err(|e| {
        let span = if matches!(&e, Error::InvalidParameter { name: "k_top", .. }) { spans.get("k_top") } else { None };
        src.err(span.or(Some(&grid_n.span())), e.to_string())
    })?;

    let b_e = curve(src, p.b_e.as_ref(), &grid)?;
    let b_l = curve(src, p.b_l.as_ref(), &grid)?;
    let params: Params = TechnologyParams::new(
        *p.theta.get_ref(),
        *p.theta_prime.get_ref(),
        *p.n_students.get_ref(),
        *p.n_workers.get_ref(),
        *p.c.get_ref(),
        b_e,
        b_l,
        k_top,
    )
    .map_err(|e| param_error(src, &spans, e))?;

    let (density, alpha_span) = match &raw.alpha {
        None => (DensitySpec::Uniform, None),
        Some(a) => {
            let d = match a.get_ref() {
                RawAlpha::Uniform => DensitySpec::Uniform,
                RawAlpha::Linear { intercept, slope } => DensitySpec::Linear { intercept: *intercept, slope: *slope },
                RawAlpha::Tabulated { file } => {
                    let mut cols = src.read_csv(&a.span(), file, 2)?;
                    let values = cols.pop().unwrap_or_default();
                    let knots = cols.pop().unwrap_or_default();
                    DensitySpec::Tabulated { knots, values }
                }
            };
            (d, Some(a.span()))
        }
    };
    let disc = discretize_density(&density, &grid).map_err(|e| src.err(alpha_span.as_ref(), e.to_string()))?;

    let mut solver = Config::default();
    let s = &raw.solver;
    let mut solver_spans: HashMap<&'static str, Range<usize>> = HashMap::new();
    let mut set = |name: &'static str, field: &mut f64, v: &Option<Spanned<f64>>| {
        if let Some(v) = v {
            *field = *v.get_ref();
            solver_spans.insert(name, v.span());
        }
    };
    set("delta", &mut solver.delta, &s.delta);
    set("c_delta", &mut solver.c_delta, &s.c_delta);
    set("tol", &mut solver.tol, &s.tol);
    set("damping", &mut solver.damping, &s.damping);
    set("delta_factor", &mut solver.delta_factor, &s.delta_factor);
    set("delta_floor", &mut solver.delta_floor, &s.delta_floor);
    let count = |v: &Option<Spanned<i64>>, name: &str, default: usize| match v {
        Some(v) if *v.get_ref() < 1 => {
            Err(src.err(Some(&v.span()), format!("{name} = {} violates {name} >= 1", v.get_ref())))
        }
        Some(v) => Ok(*v.get_ref() as usize),
        None => Ok(default),
    };
    solver.max_iter = count(&s.max_iter, "max_iter", solver.max_iter)?;
    solver.bellman_budget = count(&s.bellman_budget, "bellman_budget", solver.bellman_budget)?;
    if let Some(d) = overrides.delta {
        solver.delta = d;
        solver_spans.remove("delta");
    }
    solver.validate().map_err(|e| param_error(src, &solver_spans, e))?;

    Ok(Model { params, grid, alpha: disc.measure, density, alpha_warning: disc.warning, solver })
}

fn param_error(src: &Source, spans: &HashMap<&'static str, Range<usize>>, e: Error) -> CliError {
    let span = match &e {
        Error::InvalidParameter { name, .. } => spans.get(name),
        _ => None,
    };
    src.err(span, e.to_string())
}

fn curve(src: &Source, raw: Option<&Spanned<RawCurve>>, grid: &Grid) -> Result<Curve, CliError> {
    let k_top = grid.k_top;
    let Some(raw) = raw else {
        return Ok(UtilityCurve::exponential(k_top));
    };
    let span = raw.span();
    let c = match raw.get_ref() {
        RawCurve::Exponential { scale, rate, offset } => UtilityCurve::exponential_with(*scale, *rate, *offset, k_top),
        RawCurve::QuadraticPlus { p0, p1, p2 } => UtilityCurve::quadratic_plus(*p0, *p1, *p2, k_top),
        RawCurve::Tabulated { file } => {
            let cols = src.read_csv(&span, file, 3)?;
            UtilityCurve::tabulated(&cols[0], &cols[1], &cols[2], k_top).map_err(|e| src.err(Some(&span), e.to_string()))?
        }
    };
    let report = validate_utility(&c, grid);
    match report.failure {
        Some(f) if !report.passes => Err(src.err(Some(&span), format!("utility curve rejected: {f}"))),
        _ => Ok(c),
    }
}
