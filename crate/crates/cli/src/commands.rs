//! Subcommand pipelines. Each returns the process exit code on success.

use std::path::Path;

use pyramid_core::lp::{rhs_of, DualityReport};
use pyramid_core::matching::{
    adult_density, assortativity_check, occupation_split, predicted_masses, specialization_report,
    teacher_map_extract, uniqueness_probe, AssortativityReport, DensityReport, Masses, OccupationSplit, ProbeReport,
    SpecializationReport, TeacherMap,
};
use pyramid_core::lp::duality_report;
use pyramid_core::model::{doubling_check, validate_utility};
use pyramid_core::pyramid::{
    descendant_chain, guru_census, nearest_admissible, phase_fit, DescendantChain, GuruHierarchy, PhaseReport, Regime,
};
use pyramid_core::wages::{solve_instance, SolveStats};
use pyramid_core::{Coupling, Economy, Equilibrium, Error};
use rayon::prelude::*;
use serde::Serialize;

use crate::artifacts::{self, EPS, LAMBDA, WAGES};
use crate::config::{Model, Scenario};
use crate::error::CliError;
use crate::svg::{line_chart, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Progress messages on stderr unless quiet.
#[derive(Debug, Clone, Copy)]
pub struct Log {
    pub quiet: bool,
}

impl Log {
    pub fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// A solved economy with its occupational split.
pub struct Solved {
    pub inst: Economy,
    pub eq: Equilibrium,
    pub split: OccupationSplit<f64>,
}

impl Solved {
    pub fn ok(&self) -> bool {
        self.eq.profile.converged && self.eq.optimal
    }
}

pub fn solve_model(model: &Model) -> Result<Solved, CliError> {
    let c_eff = model.solver.c_eff(&model.params);
    let inst = Economy::new(&model.params, &model.grid, &model.alpha, model.solver.delta, c_eff)?;
    let eq = solve_instance(&inst, &model.solver, &[])?;
    let split = occupation_split(&eq.eps, &eq.lambda, &model.params, &model.grid, model.solver.delta);
    Ok(Solved { inst, eq, split })
}

#[derive(Serialize)]
struct DualityDoc<'a> {
    n: usize,
    delta: f64,
    c_eff: f64,
    converged: bool,
    optimal: bool,
    /// `max(1, |LP value|)`
    scale: f64,
    /// `b · y` for the master's own multipliers.
    lp_dual_value: f64,
    lp_self_gap: f64,
    #[serde(flatten)]
    report: &'a DualityReport,
    stats: &'a SolveStats,
}

#[derive(Serialize)]
struct Predicted {
    workers: f64,
    managers: f64,
    teachers: f64,
}

#[derive(Serialize)]
struct Assortative {
    eps: bool,
    lambda: bool,
}

#[derive(Serialize)]
struct Violations {
    eps: AssortativityReport,
    lambda: AssortativityReport,
}

#[derive(Serialize)]
struct OccupationsDoc {
    masses: Masses,
    predicted: Option<Predicted>,
    residual: f64,
    consistent: bool,
    assortative: Assortative,
    violations: Violations,
    tail_bounds: DensityReport,
    alpha_warning: Option<String>,
    uniqueness_probe: Option<ProbeReport>,
}

#[derive(Serialize)]
struct SpecializationDoc {
    #[serde(flatten)]
    report: SpecializationReport,
    top_chain: Option<DescendantChain>,
}

/// `|value - b·y|` and `b·y` for the master solution.
pub fn self_gap(s: &Solved) -> (f64, f64) {
    let rhs = rhs_of(&s.inst);
    let dual: f64 = rhs.iter().zip(&s.eq.dual).map(|(b, y)| b * y).sum();
    ((s.eq.value - dual).abs(), dual)
}

pub fn write_solve_artifacts(sc: &Scenario, model: &Model, s: &Solved) -> Result<(), CliError> {
    let dir = &sc.out_dir;
    let (params, grid) = (&model.params, &model.grid);
    let profile = &s.eq.profile;
    artifacts::write(dir, WAGES, &artifacts::wages_csv(profile, grid))?;
    artifacts::write_coupling(dir, EPS, &s.eq.eps)?;
    artifacts::write_coupling(dir, LAMBDA, &s.eq.lambda)?;

    let report = duality_report(&s.eq.lp_solution(), profile, params, grid)?;
    let (gap, dual) = self_gap(s);
    artifacts::write_json(
        dir,
        "duality.json",
        &DualityDoc {
            n: grid.n,
            delta: model.solver.delta,
            c_eff: s.inst.c_eff,
            converged: profile.converged,
            optimal: s.eq.optimal,
            scale: s.eq.value.abs().max(1.0),
            lp_dual_value: dual,
            lp_self_gap: gap,
            report: &report,
            stats: &profile.stats,
        },
    )?;

    let eps_report = assortativity_check(&s.eq.eps);
    let lambda_report = assortativity_check(&s.eq.lambda);
    let probe = match sc.probe_amplitude {
        Some(a) => Some(uniqueness_probe(&s.inst, &model.solver, sc.seed, a)?),
        None => None,
    };
    let predicted = (model.solver.delta == 0.0).then(|| {
        let (workers, managers, teachers) = predicted_masses(params);
        Predicted { workers, managers, teachers }
    });
    artifacts::write_json(
        dir,
        "occupations.json",
        &OccupationsDoc {
            masses: s.split.masses(),
            predicted,
            residual: s.split.residual,
            consistent: s.split.consistent,
            assortative: Assortative { eps: eps_report.is_assortative, lambda: lambda_report.is_assortative },
            violations: Violations { eps: eps_report, lambda: lambda_report },
            tail_bounds: adult_density(&s.split, params, grid),
            alpha_warning: model.alpha_warning.clone(),
            uniqueness_probe: probe,
        },
    )?;

    let report = specialization_report(profile, &s.split, &s.eq.eps, params, grid);
    let top = grid.n - 1;
    let top_chain = (s.split.kappa_t.weights[top] > 0.0)
        .then(|| descendant_chain(top, &s.eq.eps, &s.split, params, grid));
    artifacts::write_json(dir, "specialization.json", &SpecializationDoc { report, top_chain })?;
    Ok(())
}

pub fn solve(sc: &Scenario, log: Log) -> Result<(i32, Solved), CliError> {
    let model = sc.model()?;
    artifacts::ensure_dir(&sc.out_dir)?;
    if let Some(w) = &model.alpha_warning {
        log.info(format!("warning: {w}"));
    }
    log.info(format!("solving n = {} ...", model.grid.n));
    let s = solve_model(model)?;
    write_solve_artifacts(sc, model, &s)?;
    let st = &s.eq.profile.stats;
    log.info(format!(
        "value {}  converged {}  optimal {}  columns {}  simplex iterations {}",
        s.eq.value, s.eq.profile.converged, s.eq.optimal, st.master_columns, st.simplex_iterations
    ));
    log.info(format!("artifacts in {}", sc.out_dir.display()));
    Ok((if s.ok() { EXIT_OK } else { EXIT_NOT_CONVERGED }, s))
}

#[derive(Serialize)]
struct HierarchyDoc<'a> {
    mnemonic: String,
    #[serde(flatten)]
    hierarchy: &'a GuruHierarchy,
}

pub fn gurus(sc: &Scenario, log: Log) -> Result<i32, CliError> {
    let spec = sc.gurus.ok_or_else(|| CliError::Config {
        file: sc.path.clone(),
        line: None,
        message: "missing [gurus] table".into(),
    })?;
    let h = match guru_census(spec.n, spec.n_prime, spec.population) {
        Ok(h) => h,
        Err(Error::Inadmissible { .. }) => {
            let (below, above) = nearest_admissible(spec.n, spec.n_prime, spec.population);
            let sizes = below.map(|b| format!("{b}, ")).unwrap_or_default() + &above.to_string();
            return Err(CliError::Input(format!(
                "population {} admits no integral hierarchy for N = {}, N' = {}; nearest admissible sizes: {sizes}",
                spec.population, spec.n, spec.n_prime
            )));
        }
        Err(e) => return Err(e.into()),
    };
    artifacts::ensure_dir(&sc.out_dir)?;
    artifacts::write_json(&sc.out_dir, "hierarchy.json", &HierarchyDoc { mnemonic: h.mnemonic(), hierarchy: &h })?;
    let tree = h.render_tree();
    artifacts::write(&sc.out_dir, "hierarchy.txt", &tree)?;
    if !log.quiet {
        println!("{}\n{tree}", h.mnemonic());
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PhaseDoc<'a> {
    n: usize,
    theta: f64,
    n_students: f64,
    c: f64,
    hypotheses_hold: bool,
    #[serde(flatten)]
    report: &'a PhaseReport,
}

pub fn phase_report(model: &Model, v: &[f64], eps: &Coupling, split: &OccupationSplit<f64>) -> PhaseReport {
    let tmap: Option<TeacherMap<f64>> = teacher_map_extract(eps, &model.params, &model.grid).ok();
    phase_fit(v, eps, split, tmap.as_ref(), &model.params, &model.grid)
}

pub fn phase(sc: &Scenario, run_solve: bool, log: Log) -> Result<i32, CliError> {
    let model = sc.model()?;
    let (grid, params) = (&model.grid, &model.params);
    let (code, wages, eps, split) = if run_solve {
        let (code, s) = solve(sc, log)?;
        let t = artifacts::WageTable { skill: grid.nodes(), v: s.eq.profile.v.clone(), u: s.eq.profile.u.clone() };
        (code, t, s.eq.eps, s.split)
    } else {
        let dir = &sc.out_dir;
        if !dir.join(WAGES).exists() {
            return Err(CliError::Input(format!(
                "no solve artifacts in {}; run `solve` first or pass --solve",
                dir.display()
            )));
        }
        let t = artifacts::read_wages(dir, grid.n)?;
        let eps = artifacts::read_coupling(dir, EPS, grid.n)?;
        let lambda = artifacts::read_coupling(dir, LAMBDA, grid.n)?;
        let split = occupation_split(&eps, &lambda, params, grid, model.solver.delta);
        (EXIT_OK, t, eps, split)
    };
    let report = phase_report(model, &wages.v, &eps, &split);
    let dir = &sc.out_dir;
    artifacts::write_json(
        dir,
        "phase.json",
        &PhaseDoc {
            n: grid.n,
            theta: params.theta,
            n_students: params.n_students,
            c: params.c,
            hypotheses_hold: report.flags.all(),
            report: &report,
        },
    )?;
    write_phase_plots(dir, model, &wages, &split, &report)?;
    log.info(phase_summary(&report));
    Ok(code)
}

fn phase_summary(r: &PhaseReport) -> String {
    let opt = |x: Option<f64>| x.map_or("-".to_string(), |x| format!("{x:.4}"));
    format!(
        "{} (N theta = {}): exponent predicted {} fitted {}; limit slope predicted {} fitted {}; density ratio predicted {:.4} measured {:.4}; hypotheses hold: {}",
        regime_label(r.regime),
        r.n_theta,
        opt(r.predicted_exponent),
        opt(r.fitted_exponent),
        opt(r.predicted_limit_slope),
        opt(r.fitted_limit_slope),
        r.density_ratio_predicted,
        r.density_ratio_measured,
        r.flags.all()
    )
}

pub fn regime_label(r: Regime) -> &'static str {
    match r {
        Regime::Divergent => "N_theta>1",
        Regime::Critical => "N_theta=1",
        Regime::Bounded => "N_theta<1",
    }
}

fn write_phase_plots(
    dir: &Path,
    model: &Model,
    wages: &artifacts::WageTable,
    split: &OccupationSplit<f64>,
    r: &PhaseReport,
) -> Result<(), CliError> {
    let grid = &model.grid;
    let xs = &wages.skill;
    let zip = |ys: &[f64]| xs.iter().copied().zip(ys.iter().copied()).collect::<Vec<_>>();
    let v = line_chart(
        "Adult and student wages",
        "skill",
        "wage",
        &[Series::line("v (adult)", zip(&wages.v)), Series::line("u (student)", zip(&wages.u)).dashed()],
    );
    artifacts::write(dir, "v.svg", &v)?;

    let measured: Vec<(usize, (f64, f64))> = r
        .gradient
        .iter()
        .filter(|g| g.v_prime > 0.0 && g.dk > 0.0)
        .map(|g| (g.node, (g.dk.ln(), g.v_prime.ln())))
        .collect();
    let pts: Vec<(f64, f64)> = measured.iter().map(|m| m.1).collect();
    let mut series = vec![Series::line("log v' (measured)", pts.clone()).markers()];
    let (x_lo, x_hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    if x_lo.is_finite() {
        let anchor = match &r.fit {
            Some(f) => {
                let inside: Vec<(f64, f64)> =
                    measured.iter().filter(|(i, _)| *i >= f.window.0 && *i <= f.window.1).map(|m| m.1).collect();
                let k = inside.len().max(1) as f64;
                Some((inside.iter().map(|p| p.0).sum::<f64>() / k, inside.iter().map(|p| p.1).sum::<f64>() / k))
            }
            None => pts.first().copied(),
        };
        match (r.regime, r.predicted_exponent, r.predicted_limit_slope, anchor) {
            (Regime::Divergent, Some(p), _, Some((x0, y0))) => {
                let line = vec![(x_lo, y0 - p * (x_lo - x0)), (x_hi, y0 - p * (x_hi - x0))];
                series.push(Series::line(&format!("predicted slope -{p:.4}"), line).dashed());
            }
            (Regime::Bounded, _, Some(s), _) if s > 0.0 => {
                series.push(Series::line("predicted limit", vec![(x_lo, s.ln()), (x_hi, s.ln())]).dashed());
            }
            _ => {}
        }
    }
    let loglog = line_chart("Wage gradient near the top", "log(distance to top skill)", "log v'", &series);
    artifacts::write(dir, "vprime_loglog.svg", &loglog)?;

    let h = grid.h;
    let kappa: Vec<f64> = split.kappa.weights.iter().map(|w| w / h).collect();
    let students: Vec<f64> = split.students.weights.iter().map(|w| w / h).collect();
    let density = line_chart(
        "Adult and student densities",
        "skill",
        "density",
        &[Series::line("adults", zip(&kappa)), Series::line("students", zip(&students)).dashed()],
    );
    artifacts::write(dir, "density.svg", &density)
}

/// One lattice point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n_students: f64,
    pub theta: f64,
    pub converged: bool,
    pub optimal: bool,
    pub value: f64,
    pub v_top: f64,
    pub report: PhaseReport,
}

fn sweep_threads() -> Result<Option<usize>, CliError> {
    match std::env::var("PYRAMID_EQ_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Some(k)),
            _ => Err(CliError::Input(format!("PYRAMID_EQ_THREADS = `{s}` is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn sweep_rows(sc: &Scenario) -> Result<Vec<SweepRow>, CliError> {
    let model = sc.model()?;
    let spec = sc.sweep.as_ref().ok_or_else(|| CliError::Config {
        file: sc.path.clone(),
        line: None,
        message: "missing [sweep] table".into(),
    })?;
    let points: Vec<(f64, f64)> =
        spec.n_students.iter().flat_map(|&n| spec.theta.iter().map(move |&t| (n, t))).collect();
    let run = |&(n, t): &(f64, f64)| -> Result<SweepRow, CliError> {
        let mut m = model.clone();
        m.params.n_students = n;
        m.params.theta = t;
        let s = solve_model(&m)?;
        let report = phase_report(&m, &s.eq.profile.v, &s.eq.eps, &s.split);
        Ok(SweepRow {
            n_students: n,
            theta: t,
            converged: s.eq.profile.converged,
            optimal: s.eq.optimal,
            value: s.eq.value,
            v_top: s.eq.profile.v[m.grid.n - 1],
            report,
        })
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = sweep_threads()? {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| CliError::Input(e.to_string()))?;
    pool.install(|| points.par_iter().map(run).collect())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |x: Option<f64>| x.map_or(String::new(), |x| x.to_string());
    let mut out = String::from(
        "n_students,theta,n_theta,regime,converged,optimal,value,v_top,predicted_exponent,fitted_exponent,\
         predicted_limit_slope,fitted_limit_slope,density_ratio_predicted,density_ratio_measured,hypotheses_hold\n",
    );
    for r in rows {
        let p = &r.report;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n_students,
            r.theta,
            p.n_theta,
            regime_label(p.regime),
            r.converged,
            r.optimal,
            r.value,
            r.v_top,
            opt(p.predicted_exponent),
            opt(p.fitted_exponent),
            opt(p.predicted_limit_slope),
            opt(p.fitted_limit_slope),
            p.density_ratio_predicted,
            p.density_ratio_measured,
            p.flags.all()
        ));
    }
    out
}

pub fn sweep(sc: &Scenario, log: Log) -> Result<i32, CliError> {
    artifacts::ensure_dir(&sc.out_dir)?;
    let rows = sweep_rows(sc)?;
    artifacts::write(&sc.out_dir, "sweep.csv", &sweep_csv(&rows))?;
    for r in &rows {
        log.info(format!("N = {}, theta = {}: {}", r.n_students, r.theta, phase_summary(&r.report)));
    }
    let all = rows.iter().all(|r| r.converged && r.optimal);
    Ok(if all { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

/// Checks the file without solving and prints what it found.
pub fn validate(sc: &Scenario, log: Log) -> Result<i32, CliError> {
    let say = |s: String| {
        if !log.quiet {
            println!("{s}");
        }
    };
    say(format!("{}: ok", sc.path.display()));
    if let Some(m) = &sc.model {
        let p = &m.params;
        say(format!(
            "params: theta {} theta' {} N {} N' {} c {} (N theta = {})",
            p.theta,
            p.theta_prime,
            p.n_students,
            p.n_workers,
            p.c,
            p.n_theta()
        ));
        say(format!("grid: {} nodes, h = {}", m.grid.n, m.grid.h));
        for (name, curve) in [("b_E", &p.b_e), ("b_L", &p.b_l)] {
            let r = validate_utility(curve, &m.grid);
            say(format!("{name}: b(0) = {}, b'(0) = {}, min b'' = {}", r.value_at_zero, r.slope_at_zero, r.min_curvature));
        }
        if let Some(w) = &m.alpha_warning {
            say(format!("alpha: {w}"));
        }
        let d = doubling_check(&m.alpha, &m.grid);
        say(format!("alpha doubling constant {} ({})", d.c_hat, if d.passes { "ok" } else { "fails" }));
        if p.c == 0.0 && m.solver.c_delta == 0.0 {
            say("note: c = 0 and c_delta = 0, so education output is ignored".into());
        }
    }
    if let Some(g) = sc.gurus {
        match guru_census(g.n, g.n_prime, g.population) {
            Ok(h) => say(format!("gurus: admissible, depth {}", h.depth)),
            Err(_) => {
                let (below, above) = nearest_admissible(g.n, g.n_prime, g.population);
                say(format!("gurus: population {} inadmissible; nearest {below:?} / {above}", g.population));
            }
        }
    }
    if let Some(s) = &sc.sweep {
        say(format!("sweep: {} x {} lattice", s.n_students.len(), s.theta.len()));
    }
    Ok(EXIT_OK)
}
