//! Rank-one Mathai-Quillen current.
//!
//! For a real line bundle over a point the superconnection form reduces to
//! `A_T = sqrt(T) dy ^ ē + T y^2`, and the transgression form
//! `beta_T = ∫^B (Ŷ / 2 sqrt(T)) exp(-A_T)` can be evaluated exactly in the
//! two-generator exterior algebra spanned by `dy` (base) and `ē` (fiber).

use crate::algebra::exterior::{berezin_partial, Multivector};
use crate::error::{Error, Result};
use crate::scalar::{lit, real, Real};

const BASE: usize = 0;
const FIBER: usize = 1;

/// `beta_T` at fiber coordinate `y`, as the coefficient of the degree-zero
/// base form, reported against the positive fiber orientation.
pub fn beta_rank_one<T: Real>(y: T, t: T) -> Result<T> {
    if t <= T::zero() {
        return Err(Error::InvalidDatum {
            id: "beta_T".into(),
            reason: "T must be positive".into(),
        });
    }
    let dy = Multivector::<T>::generator(2, BASE)?;
    let e = Multivector::<T>::generator(2, FIBER)?;
    let sqrt_t = t.sqrt();
    let a_t = &(&dy * &e).scale(real(sqrt_t)) + &Multivector::scalar(2, real(t * y * y))?;
    let y_hat = e.scale(real(y / (lit::<T>(2.0) * sqrt_t)));
    let integrand = &y_hat * &(-&a_t).exp_even();
    let beta = berezin_partial(&integrand, 1)?;
    Ok(beta.scalar_part().re)
}

/// `psi = ∫_0^∞ beta_T dT` in rank one, in closed form: `-sgn(y) / 2`.
///
/// Flipping the fiber orientation negates the result.
pub fn psi_dim_one<T: Real>(y: T) -> Result<T> {
    if y == T::zero() {
        return Err(Error::ZeroSection);
    }
    if !y.is_finite() {
        return Err(Error::NonFinite("psi_dim_one"));
    }
    let half: T = lit(0.5);
    Ok(if y > T::zero() { -half } else { half })
}
