use serde::Serialize;

use crate::matching::{OccupationSplit, WEIGHT_FLOOR};
use crate::model::{GridCoupling, SkillGrid, TechnologyParams};
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainEnd {
    /// Reached an adult type with worker or manager mass.
    Labor,
    /// Reached a node with neither labor nor teaching mass.
    Unsupported,
    /// The next adult type did not move below the current one.
    Stalled,
}

/// Academic descendants `k_0 > k_1 > ... > k_d` of a teacher.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescendantChain {
    /// Continuous skills `k_i`.
    pub skills: Vec<f64>,
    /// Grid node each `k_i` is attributed to.
    pub nodes: Vec<usize>,
    /// Mean student ability `a_{i+1}` of each teacher in the chain.
    pub students: Vec<f64>,
    pub depth: usize,
    pub end: ChainEnd,
    /// No termination at grid resolution.
    pub truncated: bool,
    /// `k_i >= θ^i k_0` along the chain.
    pub theta_bound_holds: bool,
}

/// Follows a teacher at node `k0` through its students: `a_{i+1}` is the
/// mass-weighted mean student of teacher `k_i` and `k_{i+1} = z(a_{i+1}, k_i)`,
/// attributed to the nearer grid node. Stops at the first adult type that
/// carries worker or manager mass.
pub fn descendant_chain<T: Real>(
    k0: usize,
    eps: &GridCoupling<T>,
    split: &OccupationSplit<T>,
    params: &TechnologyParams<T>,
    grid: &SkillGrid<T>,
) -> DescendantChain {
    let floor = lit::<T>(WEIGHT_FLOOR);
    let n = grid.n;
    let mut by_teacher: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    for &(a, k, w) in &eps.entries {
        if w > floor {
            by_teacher[k].push((a, w));
        }
    }
    let theta = params.theta;
    let mut node = k0;
    let mut skill = grid.node(k0);
    let mut chain = DescendantChain {
        skills: vec![to_f64(&skill)],
        nodes: vec![k0],
        students: Vec::new(),
        depth: 0,
        end: ChainEnd::Labor,
        truncated: false,
        theta_bound_holds: true,
    };
    loop {
        if split.labor_at(node) > floor {
            chain.end = ChainEnd::Labor;
            break;
        }
        let class = &by_teacher[node];
        if class.is_empty() || chain.depth >= n {
            chain.end = if class.is_empty() { ChainEnd::Unsupported } else { ChainEnd::Stalled };
            chain.truncated = !class.is_empty();
            break;
        }
        let mass = class.iter().fold(T::zero(), |s, e| s + e.1);
        let a = class.iter().fold(T::zero(), |s, e| s + e.1 * grid.node(e.0)) / mass;
        let next = (T::one() - theta) * a + theta * skill;
        let s = grid.split(next);
        let next_node = if s.w_hi > lit(0.5) { s.hi } else { s.lo };
        chain.students.push(to_f64(&a));
        if next_node >= node {
            chain.end = ChainEnd::Stalled;
            chain.truncated = true;
            break;
        }
        chain.depth += 1;
        node = next_node;
        skill = next;
        chain.skills.push(to_f64(&skill));
        chain.nodes.push(node);
    }
    let th = to_f64(&theta);
    chain.theta_bound_holds = chain
        .skills
        .iter()
        .enumerate()
        .all(|(i, &k)| k >= th.powi(i as i32) * chain.skills[0] - 1e-12);
    chain
}

/// Lower bound on `v_t'(k)` from a chain of depth `d`, with `cb` the value
/// of `c b_E'` at `θ^d k` and `base` the slope `v'(θ^d k)`.
pub fn gradient_bound_with(d: u32, n_theta: f64, cb: f64, base: f64) -> f64 {
    if (n_theta - 1.0).abs() < 1e-12 {
        d as f64 * cb + base
    } else {
        let p = n_theta.powi(d as i32);
        (1.0 - p) / (1.0 - n_theta) * n_theta * cb + p * base
    }
}

/// As [`gradient_bound_with`] with `c b_E'(θ^d k)` taken from the parameters.
pub fn gradient_bound<T: Real>(d: u32, k: T, v_prime_at_base: T, params: &TechnologyParams<T>) -> T {
    let at = params.theta.powi(d as i32) * k;
    let cb = params.c * params.b_e.slope(at);
    lit(gradient_bound_with(d, to_f64(&params.n_theta()), to_f64(&cb), to_f64(&v_prime_at_base)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::feasible_seed;
    use crate::matching::occupation_split;
    use crate::model::GridMeasure;

    #[test]
    fn geometric_branch() {
        assert_eq!(gradient_bound_with(3, 2.0, 1.0, 0.0), 14.0);
    }

    #[test]
    fn critical_branch() {
        assert_eq!(gradient_bound_with(5, 1.0, 1.0, 2.0), 7.0);
    }

    #[test]
    fn zero_depth_keeps_base() {
        assert_eq!(gradient_bound_with(0, 3.0, 5.0, 1.25), 1.25);
        assert_eq!(gradient_bound_with(0, 1.0, 5.0, 1.25), 1.25);
    }

    #[test]
    fn bound_reads_curve_slope() {
        let p = TechnologyParams::exponential(0.5, 0.5, 4.0, 1.0, 0.5).unwrap();
        // Nθ = 2, c b_E'(θ^2 k) = 0.5 e^{0.2}
        let got = gradient_bound(2, 0.8, 1.0, &p);
        let cb = 0.5 * 0.2f64.exp();
        assert!((got - (3.0 * 2.0 * cb + 4.0)).abs() < 1e-12);
    }

    #[test]
    fn worker_head_has_depth_zero() {
        let g = SkillGrid::new(4, 1.0).unwrap();
        let alpha = GridMeasure::new(vec![0.25; 4]).unwrap();
        let p = TechnologyParams::exponential(0.5, 0.5, 2.0, 1.0, 0.1).unwrap();
        let (eps, lam) = feasible_seed(&p, &alpha, &g, 0.0).unwrap();
        let s = occupation_split(&eps, &lam, &p, &g, 0.0);
        let c = descendant_chain(1, &eps, &s, &p, &g);
        assert_eq!(c.depth, 0);
        assert_eq!(c.nodes, vec![1]);
        assert_eq!(c.end, ChainEnd::Labor);
    }
}
