//! Hurwitz zeta `ζ(s, a) = Σ_{k>=0} (k + a)^{-s}` by Euler-Maclaurin
//! summation, with its `s`-derivative from the same expansion.

use nalgebra::{Complex, ComplexField};

use crate::error::{Error, Result};
use crate::scalar::{lit, real, to_f64, Real};

/// `B_{2j} / (2j)!` for `j = 1..=8`.
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
];

/// Truncation point `m` and number of Bernoulli corrections `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HurwitzParams {
    pub m: usize,
    pub k: usize,
}

impl Default for HurwitzParams {
    fn default() -> Self {
        Self { m: 50, k: 6 }
    }
}

impl HurwitzParams {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if m < 10 {
            return Err(Error::InvalidHurwitzParams(format!("M = {m} is below 10")));
        }
        if !(2..=8).contains(&k) {
            return Err(Error::InvalidHurwitzParams(format!("K = {k} outside [2, 8]")));
        }
        Ok(Self { m, k })
    }
}

/// `ζ(s, a)` and `∂_s ζ(s, a)` for `a ∈ (0, 1]`, `s ≠ 1`.
pub fn hurwitz_zeta<T: Real>(s: Complex<T>, a: T, p: HurwitzParams) -> Result<(Complex<T>, Complex<T>)> {
    HurwitzParams::new(p.m, p.k)?;
    if !(a > T::zero() && a <= T::one()) {
        return Err(Error::HurwitzShift(to_f64(a)));
    }
    let one = real::<T>(T::one());
    if (s - one).modulus() == T::zero() {
        return Err(Error::HurwitzPole);
    }
    let mut value = real(T::zero());
    let mut deriv = real(T::zero());
    for k in 0..p.m {
        let ln = (lit::<T>(k as f64) + a).ln();
        let term = (-s * real(ln)).exp();
        value += term;
        deriv -= term * real(ln);
    }
    let n = lit::<T>(p.m as f64) + a;
    let ln_n = n.ln();
    let n_pow = |e: Complex<T>| (e * real(ln_n)).exp();

    // tail integral N^{1-s}/(s-1)
    let tail = n_pow(one - s) / (s - one);
    value += tail;
    deriv += -tail * real(ln_n) - tail / (s - one);

    // endpoint N^{-s}/2
    let half = n_pow(-s) * real(lit::<T>(0.5));
    value += half;
    deriv -= half * real(ln_n);

    // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
    for j in 1..=p.k {
        let factors: Vec<Complex<T>> = (0..2 * j - 1).map(|i| s + real(lit::<T>(i as f64))).collect();
        let poly = factors.iter().fold(one, |acc, &f| acc * f);
        let poly_d = (0..factors.len()).fold(real(T::zero()), |acc, skip| {
            acc + factors
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .fold(one, |prod, (_, &f)| prod * f)
        });
        let c = real(lit::<T>(BERNOULLI_OVER_FACTORIAL[j - 1]));
        let pw = n_pow(-s - real(lit::<T>((2 * j - 1) as f64)));
        value += c * poly * pw;
        deriv += c * (poly_d - poly * real(ln_n)) * pw;
    }
    Ok((value, deriv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use approx::assert_relative_eq;

    #[test]
    fn classical_values() {
        let p = HurwitzParams::default();
        let (z2, _) = hurwitz_zeta(cplx(2.0, 0.0), 1.0, p).unwrap();
        assert_relative_eq!(z2.re, std::f64::consts::PI.powi(2) / 6.0, epsilon = 1e-13);
        let (zm1, _) = hurwitz_zeta(cplx(-1.0, 0.0), 1.0, p).unwrap();
        assert_relative_eq!(zm1.re, -1.0 / 12.0, epsilon = 1e-11);
        for a in [0.1, 0.5, 0.9, 1.0] {
            let (z0, _) = hurwitz_zeta(cplx(0.0, 0.0), a, p).unwrap();
            assert_relative_eq!(z0.re, 0.5 - a, epsilon = 1e-13);
        }
    }

    #[test]
    fn rejects_pole_and_bad_inputs() {
        let p = HurwitzParams::default();
        assert_eq!(hurwitz_zeta(cplx(1.0, 0.0), 0.5, p).unwrap_err(), Error::HurwitzPole);
        assert!(matches!(hurwitz_zeta(cplx(0.0, 0.0), 0.0, p), Err(Error::HurwitzShift(_))));
        assert!(HurwitzParams::new(5, 6).is_err());
        assert!(HurwitzParams::new(50, 9).is_err());
    }
}
