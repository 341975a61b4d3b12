//! Closed forms and hand-derived instances.

use approx::assert_relative_eq;
use pyramid_core::instance::Instance;
use pyramid_core::lp::{assemble_from_instance, duality_report, solve_lp, LpStatus};
use pyramid_core::matching::{
    occupation_split, predicted_masses, specialization_report, teacher_map_extract, uniqueness_probe,
};
use pyramid_core::model::{GridMeasure, SkillGrid, TechnologyParams};
use pyramid_core::pyramid::{
    descendant_chain, gradient_bound_with, guru_census, predicted_density_ratio, predicted_exponent,
    predicted_limit_slope, top_slopes,
};
use pyramid_core::wages::{solve_instance, Equilibrium, SolverConfig};

fn uniform(n: usize) -> GridMeasure<f64> {
    GridMeasure::new(vec![1.0 / n as f64; n]).unwrap()
}

fn solved(n: usize, params: &TechnologyParams<f64>) -> (Instance<f64>, Equilibrium<f64>) {
    let grid = SkillGrid::new(n, 1.0).unwrap();
    let inst = Instance::new(params, &grid, &uniform(n), 0.0, params.c).unwrap();
    let eq = solve_instance(&inst, &SolverConfig::default(), &[]).unwrap();
    assert!(eq.optimal && eq.profile.converged);
    (inst, eq)
}

// One skill type with b = exp, so every pair produces b(0) = 1. With N = 2,
// N' = 1 half the adults teach and the rest split into worker-manager
// pairs of mass 1/4 each: output 1/4. A pair's wages sum to 1, so v = 1/2,
// and a teacher's wage is two students' payments, so u = 1/4.
#[test]
fn single_type_economy_from_both_paths() {
    let params = TechnologyParams::exponential(0.5, 0.5, 2.0, 1.0, 0.0).unwrap();
    let grid = SkillGrid::new(1, 1.0).unwrap();
    let c_delta = 1e-12;
    let inst = Instance::new(&params, &grid, &uniform(1), 0.0, c_delta).unwrap();

    let lp = solve_lp(&assemble_from_instance(&inst).unwrap());
    assert_eq!(lp.status, LpStatus::Optimal);
    assert!((lp.value - 0.25).abs() <= 1e-9);

    let config = SolverConfig { c_delta, ..SolverConfig::default() };
    let eq = solve_instance(&inst, &config, &[]).unwrap();
    assert!((eq.profile.v[0] - 0.5).abs() <= 1e-9);
    assert!((eq.profile.u[0] - 0.25).abs() <= 1e-9);
    assert!((eq.profile.objective - lp.value).abs() <= 1e-9);
}

#[test]
fn occupation_masses_match_the_census_fractions() {
    // 110 = 90 + 9 + 11 with N = N' = 10
    let params = TechnologyParams::exponential(0.5, 0.5, 10.0, 10.0, 0.1).unwrap();
    let (w, m, t) = predicted_masses(&params);
    let h = guru_census(10, 10, 110).unwrap();
    let l = &h.levels[0];
    assert_relative_eq!(w * 110.0, l.workers as f64, epsilon = 1e-12);
    assert_relative_eq!(m * 110.0, l.managers as f64, epsilon = 1e-12);
    assert_relative_eq!(t * 110.0, l.teachers as f64, epsilon = 1e-12);
}

#[test]
fn phase_closed_forms() {
    let p = TechnologyParams::exponential(0.5, 0.5, 10.0, 1.0, 0.1).unwrap();
    assert_relative_eq!(predicted_exponent(&p).unwrap(), 5f64.log10(), epsilon = 1e-15);
    assert_relative_eq!(predicted_exponent(&p).unwrap(), 0.69897, epsilon = 1e-5);
    assert_relative_eq!(predicted_density_ratio(&p), 0.95 / 0.5, epsilon = 1e-15);

    // N = 1, θ = 1/2: c max b_E' / (1/(Nθ) - 1) = 0.1 e / 1
    let p = TechnologyParams::exponential(0.5, 0.5, 1.0, 1.0, 0.1).unwrap();
    let g = SkillGrid::new(16, 1.0).unwrap();
    assert_relative_eq!(predicted_limit_slope(&p, &g), 0.1 * 1f64.exp(), epsilon = 1e-12);
    assert!(predicted_exponent(&p).is_none());
}

#[test]
fn gradient_bound_unrolls_its_recursion() {
    // g_0 = base, g_d = Nθ (cb + g_{d-1})
    for &nth in &[0.3, 1.0, 2.5, 5.0] {
        for &(cb, base) in &[(0.1, 0.0), (0.27, 1.3), (1.0, 0.5)] {
            let mut g = base;
            for d in 0..8u32 {
                assert_relative_eq!(gradient_bound_with(d, nth, cb, base), g, max_relative = 1e-12);
                g = nth * (cb + g);
            }
        }
    }
}

#[test]
fn descendant_chains_stay_above_theta_powers() {
    let params = TechnologyParams::exponential(0.5, 0.5, 10.0, 1.0, 0.1).unwrap();
    let (inst, eq) = solved(48, &params);
    let split = occupation_split(&eq.eps, &eq.lambda, &params, &inst.grid, 0.0);
    let mut seen = 0;
    for k in 0..inst.grid.n {
        if split.kappa_t.weights[k] > 1e-12 {
            let chain = descendant_chain(k, &eq.eps, &split, &params, &inst.grid);
            assert!(chain.theta_bound_holds, "node {k}: {chain:?}");
            for (i, &s) in chain.skills.iter().enumerate() {
                assert!(s >= 0.5f64.powi(i as i32) * chain.skills[0] - 1e-12);
            }
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn top_slopes_obey_linearity_of_the_education_map() {
    // k_g = (1-θ) a + θ k_t, so k_g' = (1-θ) + θ k_t' whatever the fit
    let params = TechnologyParams::exponential(0.5, 0.3, 10.0, 1.0, 0.1).unwrap();
    let (inst, eq) = solved(64, &params);
    let split = occupation_split(&eq.eps, &eq.lambda, &params, &inst.grid, 0.0);
    let tmap = teacher_map_extract(&eq.eps, &params, &inst.grid).unwrap();
    let s = top_slopes(&tmap, &split, &params).unwrap();
    assert_relative_eq!(s.k_g_slope, 0.5 + 0.5 * s.k_t_slope, epsilon = 1e-9);
    assert_relative_eq!(s.predicted_k_g, 0.5 / 0.95, epsilon = 1e-15);
    assert_relative_eq!(s.predicted_k_t, 0.5 / 9.5, epsilon = 1e-15);
}

#[test]
fn small_perturbations_keep_the_optimal_matching() {
    let params = TechnologyParams::exponential(0.5, 0.5, 10.0, 1.0, 0.1).unwrap();
    let grid = SkillGrid::new(32, 1.0).unwrap();
    let inst = Instance::new(&params, &grid, &uniform(32), 0.0, 0.1).unwrap();
    for seed in 0..3 {
        let r = uniqueness_probe(&inst, &SolverConfig::default(), seed, 1e-7).unwrap();
        assert!(r.passes, "{r:?}");
    }
}

#[test]
fn wage_profile_certifies_the_lp_value() {
    let params = TechnologyParams::exponential(0.4, 0.6, 4.0, 3.0, 0.2).unwrap();
    let (inst, eq) = solved(32, &params);
    let rep = duality_report(&eq.lp_solution(), &eq.profile, &params, &inst.grid).unwrap();
    let scale = rep.lp_value.abs().max(1.0);
    assert!(rep.gap <= 1e-6 * scale, "{rep:?}");
    assert!(rep.eps_f.abs() <= 1e-6 && rep.lambda_g.abs() <= 1e-6, "{rep:?}");
}

#[test]
fn specialization_orderings_on_a_strongly_hierarchical_economy() {
    // N'θ' = 5 >= e and Nθ = 5 >= 1
    let params = TechnologyParams::exponential(0.5, 0.5, 10.0, 10.0, 0.1).unwrap();
    let (inst, eq) = solved(32, &params);
    let split = occupation_split(&eq.eps, &eq.lambda, &params, &inst.grid, 0.0);
    let rep = specialization_report(&eq.profile, &split, &eq.eps, &params, &inst.grid);
    assert!(rep.hypotheses.b.holds && rep.hypotheses.d.holds);
    assert!(rep.orderings.workers_below_managers.ok, "{:?}", rep.orderings.workers_below_managers);
    assert!(rep.orderings.students_below_teachers.ok);
    // recheck (d) straight from the support
    assert!(eq.eps.entries.iter().filter(|e| e.2 > 1e-12).all(|&(a, k, _)| a <= k));
}

#[test]
fn wages_are_convex_where_no_adult_lives() {
    // the bottom nodes carry no adults here; the dual is free there and the
    // solver must still return a convex non-decreasing v
    let params = TechnologyParams::exponential(0.4, 0.6, 4.0, 3.0, 0.2).unwrap();
    let (_, eq) = solved(32, &params);
    let v = &eq.profile.v;
    assert!(v.windows(2).all(|d| d[1] >= d[0] - 1e-9), "{v:?}");
    assert!(v.windows(3).all(|d| d[0] + d[2] - 2.0 * d[1] >= -1e-9), "{v:?}");
}
