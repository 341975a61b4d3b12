use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::instance::Instance;
use crate::model::GridCoupling;
use crate::scalar::{lit, to_f64, Real};
use crate::wages::{solve_instance, SolverConfig};

/// Largest total-variation distance accepted as "same couplings".
pub const PROBE_TV_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub seed: u64,
    pub amplitude: f64,
    pub tv_eps: f64,
    pub tv_lambda: f64,
    pub both_optimal: bool,
    pub passes: bool,
}

/// `½ Σ |μ - ν|` over the union of supports.
pub fn total_variation<T: Real>(a: &GridCoupling<T>, b: &GridCoupling<T>) -> f64 {
    let n = a.n;
    let mut diff = std::collections::BTreeMap::new();
    for &(i, j, w) in &a.entries {
        *diff.entry(i * n + j).or_insert(0.0) += to_f64(&w);
    }
    for &(i, j, w) in &b.entries {
        *diff.entry(i * n + j).or_insert(0.0) -= to_f64(&w);
    }
    0.5 * diff.values().map(|d: &f64| d.abs()).sum::<f64>()
}

/// Re-solves with every objective coefficient shifted by an independent
/// uniform draw in `[-amplitude, amplitude]` and compares the couplings.
pub fn uniqueness_probe<T: Real>(inst: &Instance<T>, config: &SolverConfig<T>, seed: u64, amplitude: f64) -> Result<ProbeReport> {
    let base = solve_instance(inst, config, &[])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shifted = inst.clone();
    for c in shifted.edu.iter_mut().chain(shifted.labor.iter_mut()) {
        *c = *c + lit::<T>(rng.gen_range(-amplitude..=amplitude));
    }
    let other = solve_instance(&shifted, config, &base.columns)?;
    let tv_eps = total_variation(&base.eps, &other.eps);
    let tv_lambda = total_variation(&base.lambda, &other.lambda);
    let both_optimal = base.optimal && other.optimal;
    Ok(ProbeReport {
        seed,
        amplitude,
        tv_eps,
        tv_lambda,
        both_optimal,
        passes: both_optimal && tv_eps < PROBE_TV_LIMIT && tv_lambda < PROBE_TV_LIMIT,
    })
}
