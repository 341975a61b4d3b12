use serde::Serialize;

use crate::model::GridCoupling;
use crate::scalar::{lit, Real};

/// Weights at or below this are simplex dust, not support.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Violations listed in full up to this many pairs; the count is exact.
const MAX_LISTED: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssortativityReport {
    pub is_assortative: bool,
    pub violation_count: usize,
    /// Pairs `((a, k), (a', k'))` with `(a' - a)(k' - k) < 0`.
    pub violations: Vec<((usize, usize), (usize, usize))>,
    pub support_size: usize,
    pub weight_floor: f64,
}

pub fn assortativity_check<T: Real>(coupling: &GridCoupling<T>) -> AssortativityReport {
    let mut support: Vec<(usize, usize)> =
        coupling.entries.iter().filter(|e| e.2 > lit(WEIGHT_FLOOR)).map(|e| (e.0, e.1)).collect();
    support.sort_unstable();
    support.dedup();
    let mut violations = Vec::new();
    let mut count = 0;
    for (i, &(a, k)) in support.iter().enumerate() {
        for &(a2, k2) in &support[i + 1..] {
            // sorted: a2 >= a, and a2 == a never violates
            if a2 > a && k2 < k {
                count += 1;
                if violations.len() < MAX_LISTED {
                    violations.push(((a, k), (a2, k2)));
                }
            }
        }
    }
    AssortativityReport {
        is_assortative: count == 0,
        violation_count: count,
        violations,
        support_size: support.len(),
        weight_floor: WEIGHT_FLOOR,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_assortative() {
        let c = GridCoupling::new(3, vec![(0, 0, 0.2), (1, 1, 0.3), (2, 2, 0.5)]).unwrap();
        assert!(assortativity_check(&c).is_assortative);
    }

    #[test]
    fn anti_diagonal_pair_is_one_violation() {
        let c = GridCoupling::new(2, vec![(0, 1, 0.5), (1, 0, 0.5)]).unwrap();
        let r = assortativity_check(&c);
        assert!(!r.is_assortative);
        assert_eq!(r.violation_count, 1);
        assert_eq!(r.violations, vec![((0, 1), (1, 0))]);
    }

    #[test]
    fn dust_below_floor_is_ignored() {
        let c = GridCoupling::new(2, vec![(0, 1, 0.5), (1, 0, 1e-14)]).unwrap();
        assert!(assortativity_check(&c).is_assortative);
    }
}
