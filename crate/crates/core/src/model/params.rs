use crate::error::{Error, Result};
use crate::model::utility::UtilityCurve;
use crate::scalar::{to_f64, Real};

/// Exogenous data of one economy.
#[derive(Debug, Clone, PartialEq)]
pub struct TechnologyParams<T> {
    pub theta: T,
    pub theta_prime: T,
    /// Students per teacher, `N >= 1`.
    pub n_students: T,
    /// Workers per manager, `N' > 0`.
    pub n_workers: T,
    pub c: T,
    pub b_e: UtilityCurve<T>,
    pub b_l: UtilityCurve<T>,
    pub k_top: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Education,
    Labor,
}

fn bad(name: &'static str, value: f64, bound: &'static str) -> Error {
    Error::InvalidParameter { name, value, bound }
}

impl<T: Real> TechnologyParams<T> {
    pub fn new(
        theta: T,
        theta_prime: T,
        n_students: T,
        n_workers: T,
        c: T,
        b_e: UtilityCurve<T>,
        b_l: UtilityCurve<T>,
        k_top: T,
    ) -> Result<Self> {
        let p = TechnologyParams { theta, theta_prime, n_students, n_workers, c, b_e, b_l, k_top };
        p.validate()?;
        Ok(p)
    }

    /// Exponential utilities on `[0, 1)`.
    pub fn exponential(theta: T, theta_prime: T, n_students: T, n_workers: T, c: T) -> Result<Self> {
        let one = T::one();
        Self::new(
            theta,
            theta_prime,
            n_students,
            n_workers,
            c,
            UtilityCurve::exponential(one),
            UtilityCurve::exponential(one),
            one,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let (zero, one) = (T::zero(), T::one());
        let open = |x: T| x > zero && x < one;
        if !open(self.theta) {
            return Err(bad("theta", to_f64(&self.theta), "0 < theta < 1"));
        }
        if !open(self.theta_prime) {
            return Err(bad("theta_prime", to_f64(&self.theta_prime), "0 < theta_prime < 1"));
        }
        if !(self.n_students >= one) || !self.n_students.is_finite() {
            return Err(bad("N", to_f64(&self.n_students), "N >= 1"));
        }
        if !(self.n_workers > zero) || !self.n_workers.is_finite() {
            return Err(bad("N_prime", to_f64(&self.n_workers), "N_prime > 0"));
        }
        if !(self.c >= zero) || !self.c.is_finite() {
            return Err(bad("c", to_f64(&self.c), "c >= 0"));
        }
        if !(self.k_top > zero) || !self.k_top.is_finite() {
            return Err(bad("k_top", to_f64(&self.k_top), "k_top > 0"));
        }
        Ok(())
    }

    /// `Nθ`, the quantity whose position relative to 1 sets the regime.
    pub fn n_theta(&self) -> T {
        self.n_students * self.theta
    }

    fn check(&self, x: T) -> Result<()> {
        if !(x >= T::zero() && x <= self.k_top) {
            return Err(Error::OutOfDomain { value: to_f64(&x), top: to_f64(&self.k_top) });
        }
        Ok(())
    }
}

/// `z(a, k) = (1-θ) a + θ k`.
pub fn z_map<T: Real>(a: T, k: T, theta: T, k_top: T) -> Result<T> {
    for x in [a, k] {
        if !(x >= T::zero() && x <= k_top) {
            return Err(Error::OutOfDomain { value: to_f64(&x), top: to_f64(&k_top) });
        }
    }
    if !(theta > T::zero() && theta < T::one()) {
        return Err(bad("theta", to_f64(&theta), "0 < theta < 1"));
    }
    if a == k {
        return Ok(a);
    }
    Ok((T::one() - theta) * a + theta * k)
}

/// `b_E(z(a,k))` for education, `b_L((1-θ')a + θ'k)` for labor.
pub fn production_eval<T: Real>(params: &TechnologyParams<T>, sector: Sector, a: T, k: T) -> Result<T> {
    params.check(a)?;
    params.check(k)?;
    Ok(match sector {
        Sector::Education => params.b_e.value(z_map(a, k, params.theta, params.k_top)?),
        Sector::Labor => params.b_l.value(z_map(a, k, params.theta_prime, params.k_top)?),
    })
}
