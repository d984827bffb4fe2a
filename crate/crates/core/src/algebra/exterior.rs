//! Exterior algebra over a finite set of generators, Berezin integration and
//! Pfaffians.
//!
//! Blades are stored sparsely, keyed by a bitmask of generator indices; the
//! mask `0b1011` stands for `e^0 ^ e^1 ^ e^3`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, ComplexField, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::{lit, real, Real};

/// Largest supported generator count (bitmask width).
pub const MAX_GENERATORS: usize = 64;

/// Sign of `e_a ^ e_b` relative to the sorted blade `e_{a|b}`; zero when
/// the blades share a generator.
pub fn blade_sign(a: u64, b: u64) -> i32 {
    if a & b != 0 {
        return 0;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> j).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Converts a strictly increasing index tuple into a blade mask.
pub fn mask_of(indices: &[usize]) -> Option<u64> {
    let mut mask = 0u64;
    let mut prev: Option<usize> = None;
    for &i in indices {
        if i >= MAX_GENERATORS || prev.is_some_and(|p| p >= i) {
            return None;
        }
        mask |= 1 << i;
        prev = Some(i);
    }
    Some(mask)
}

/// Sorted generator indices of a blade mask.
pub fn indices_of(mask: u64) -> Vec<usize> {
    (0..MAX_GENERATORS).filter(|i| mask >> i & 1 == 1).collect()
}

fn top_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Element of `Λ(C^n)*` with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Multivector<T: Real> {
    generators: usize,
    terms: BTreeMap<u64, Complex<T>>,
}

impl<T: Real> Multivector<T> {
    pub fn zero(generators: usize) -> Result<Self> {
        if generators > MAX_GENERATORS {
            return Err(Error::TooManyGenerators {
                found: generators,
                max: MAX_GENERATORS,
            });
        }
        Ok(Self {
            generators,
            terms: BTreeMap::new(),
        })
    }

    pub fn scalar(generators: usize, c: Complex<T>) -> Result<Self> {
        let mut m = Self::zero(generators)?;
        m.add_term(0, c);
        Ok(m)
    }

    /// The generator `e^i` (0-based).
    pub fn generator(generators: usize, i: usize) -> Result<Self> {
        if i >= generators {
            return Err(Error::DimensionMismatch {
                context: "multivector generator index",
                expected: generators,
                found: i,
            });
        }
        let mut m = Self::zero(generators)?;
        m.add_term(1 << i, real(T::one()));
        Ok(m)
    }

    /// `c * e^{i_1} ^ ... ^ e^{i_k}` for a strictly increasing tuple.
    pub fn blade(generators: usize, indices: &[usize], c: Complex<T>) -> Result<Self> {
        let mask = mask_of(indices)
            .filter(|m| *m & !top_mask(generators) == 0)
            .ok_or(Error::DimensionMismatch {
                context: "multivector blade indices",
                expected: generators,
                found: indices.iter().copied().max().unwrap_or(0),
            })?;
        let mut m = Self::zero(generators)?;
        m.add_term(mask, c);
        Ok(m)
    }

    /// `sum_k v_k e^k` for a vector of coefficients.
    pub fn linear(coefficients: &[Complex<T>]) -> Result<Self> {
        let mut m = Self::zero(coefficients.len())?;
        for (i, c) in coefficients.iter().enumerate() {
            m.add_term(1 << i, *c);
        }
        Ok(m)
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, Complex<T>)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, mask: u64, c: Complex<T>) {
        if c == Complex::new(T::zero(), T::zero()) {
            return;
        }
        let entry = self
            .terms
            .entry(mask)
            .or_insert_with(|| Complex::new(T::zero(), T::zero()));
        *entry += c;
        if *entry == Complex::new(T::zero(), T::zero()) {
            self.terms.remove(&mask);
        }
    }

    pub fn coefficient(&self, indices: &[usize]) -> Complex<T> {
        mask_of(indices)
            .and_then(|m| self.terms.get(&m).copied())
            .unwrap_or_else(|| real(T::zero()))
    }

    /// Coefficient of `e^0 ^ ... ^ e^{n-1}`.
    pub fn top_coefficient(&self) -> Complex<T> {
        self.terms
            .get(&top_mask(self.generators))
            .copied()
            .unwrap_or_else(|| real(T::zero()))
    }

    pub fn scalar_part(&self) -> Complex<T> {
        self.terms.get(&0).copied().unwrap_or_else(|| real(T::zero()))
    }

    /// Homogeneous component of the given degree.
    pub fn grade(&self, degree: usize) -> Self {
        Self {
            generators: self.generators,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.count_ones() as usize == degree)
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coefficient_norm(&self) -> T {
        self.terms
            .values()
            .fold(T::zero(), |a, z| a + z.norm_sqr())
            .sqrt()
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        let mut out = Self {
            generators: self.generators,
            terms: BTreeMap::new(),
        };
        for (k, v) in &self.terms {
            out.add_term(*k, *v * c);
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(
            self.generators, other.generators,
            "wedge of multivectors over different generator sets"
        );
        let mut out = Self {
            generators: self.generators,
            terms: BTreeMap::new(),
        };
        for (&a, &x) in &self.terms {
            for (&b, &y) in &other.terms {
                match blade_sign(a, b) {
                    0 => {}
                    1 => out.add_term(a | b, x * y),
                    _ => out.add_term(a | b, -(x * y)),
                }
            }
        }
        out
    }

    /// `exp(w)` for an element whose non-scalar part is even (so that it
    /// commutes with itself and is nilpotent). The series terminates at
    /// degree `n`.
    pub fn exp_even(&self) -> Self {
        let c = self.scalar_part();
        let mut nil = self.clone();
        nil.terms.remove(&0);
        let one = real(T::one());
        let mut sum = Self::scalar(self.generators, one).expect("generator count already valid");
        let mut power = sum.clone();
        let mut k = 1usize;
        loop {
            power = power.wedge(&nil).scale(real(T::one() / lit::<T>(k as f64)));
            if power.is_zero() || k > self.generators {
                break;
            }
            sum = &sum + &power;
            k += 1;
        }
        sum.scale(c.exp())
    }
}

impl<T: Real> Add for &Multivector<T> {
    type Output = Multivector<T>;
    fn add(self, rhs: Self) -> Multivector<T> {
        assert_eq!(self.generators, rhs.generators);
        let mut out = self.clone();
        for (&k, &v) in &rhs.terms {
            out.add_term(k, v);
        }
        out
    }
}

impl<T: Real> Sub for &Multivector<T> {
    type Output = Multivector<T>;
    fn sub(self, rhs: Self) -> Multivector<T> {
        self + &(-rhs)
    }
}

impl<T: Real> Neg for &Multivector<T> {
    type Output = Multivector<T>;
    fn neg(self) -> Multivector<T> {
        self.scale(real(-T::one()))
    }
}

impl<T: Real> Mul for &Multivector<T> {
    type Output = Multivector<T>;
    fn mul(self, rhs: Self) -> Multivector<T> {
        self.wedge(rhs)
    }
}

/// Normalization `(-1)^{n(n+1)/2} pi^{-n/2}` of the Berezin integral.
pub fn berezin_constant<T: Real>(n: usize) -> T {
    let sign = if (n * (n + 1) / 2) % 2 == 0 {
        T::one()
    } else {
        -T::one()
    };
    sign * T::pi().powf(-lit::<T>(n as f64) / lit(2.0))
}

/// Berezin integral over all generators of `w`: the top coefficient times
/// `(-1)^{n(n+1)/2} pi^{-n/2}`; every lower-degree component integrates to
/// zero. The result is reported against the positive orientation.
pub fn berezin_integral<T: Real>(w: &Multivector<T>) -> Complex<T> {
    w.top_coefficient() * berezin_constant::<T>(w.generators())
}

/// Berezin integral over the trailing `w.generators() - leading` generators,
/// leaving a multivector over the `leading` ones. Blades are read as
/// `alpha ^ beta` with `alpha` in the leading generators.
pub fn berezin_partial<T: Real>(w: &Multivector<T>, leading: usize) -> Result<Multivector<T>> {
    let n = w.generators();
    if leading > n {
        return Err(Error::DimensionMismatch {
            context: "partial Berezin integral",
            expected: n,
            found: leading,
        });
    }
    let fiber = n - leading;
    let low = top_mask(leading);
    let high = top_mask(n) & !low;
    let c = berezin_constant::<T>(fiber);
    let mut out = Multivector::zero(leading)?;
    for (mask, v) in w.terms() {
        if mask & high == high {
            out.add_term(mask & low, v * c);
        }
    }
    Ok(out)
}

/// Real antisymmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymMatrix<T: Real> {
    entries: DMatrix<T>,
}

impl<T: Real> AntisymMatrix<T> {
    /// Accepts only matrices with `a + a^T = 0` exactly.
    pub fn new(entries: DMatrix<T>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::NonSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("antisymmetric matrix"));
        }
        let deviation = (&entries + entries.transpose()).amax();
        if deviation != T::zero() {
            return Err(Error::NotAntisymmetric {
                deviation: crate::scalar::to_f64(deviation),
            });
        }
        Ok(Self { entries })
    }

    /// `(m - m^T) / 2`, antisymmetric by construction.
    pub fn antisymmetrize(m: &DMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NonSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let n = m.nrows();
        let half: T = lit(0.5);
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let x = (m[(i, j)] - m[(j, i)]) * half;
                a[(i, j)] = x;
                a[(j, i)] = -x;
            }
        }
        Self::new(a)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    /// `A˙ = 1/2 sum_{ij} <e_i, A e_j> e^i ^ e^j = sum_{i<j} a_ij e^i ^ e^j`.
    pub fn to_two_form(&self) -> Result<Multivector<T>> {
        let n = self.dim();
        let mut w = Multivector::zero(n)?;
        for i in 0..n {
            for j in i + 1..n {
                w.add_term((1 << i) | (1 << j), real(self.entries[(i, j)]));
            }
        }
        Ok(w)
    }
}

/// Pfaffian by skew-symmetric Gaussian elimination with pivoting (`O(n^3)`).
pub fn pfaffian<T: Real>(a: &AntisymMatrix<T>) -> T {
    let n = a.dim();
    if n % 2 == 1 {
        return T::zero();
    }
    let mut m = a.entries.clone();
    let mut pf = T::one();
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        for i in k + 2..n {
            if m[(i, k)].abs() > m[(kp, k)].abs() {
                kp = i;
            }
        }
        if kp != k + 1 {
            m.swap_rows(k + 1, kp);
            m.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = m[(k, k + 1)];
        if pivot == T::zero() {
            return T::zero();
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<T> = (k + 2..n).map(|j| m[(k, j)] / pivot).collect();
            let col: Vec<T> = (k + 2..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Pfaffian read off from its Berezin definition: `Pf[A] = ∫^B exp(-B˙/2)`
/// with `B = 2 pi A`. Exponential in `n`; meant as a cross-check.
pub fn pfaffian_berezin<T: Real>(a: &AntisymMatrix<T>) -> Result<T> {
    let two_pi = T::two_pi();
    let scaled = AntisymMatrix {
        entries: &a.entries * two_pi,
    };
    let form = scaled.to_two_form()?.scale(real(-lit::<T>(0.5)));
    Ok(berezin_integral(&form.exp_even()).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn block(a: f64, b: f64) -> AntisymMatrix<f64> {
        AntisymMatrix::new(DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, a, 0.0, 0.0, -a, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, b, 0.0, 0.0, -b, 0.0,
            ],
        ))
        .unwrap()
    }

    #[test]
    fn blade_signs() {
        assert_eq!(blade_sign(0b01, 0b10), 1);
        assert_eq!(blade_sign(0b10, 0b01), -1);
        assert_eq!(blade_sign(0b11, 0b01), 0);
        // e1 ^ (e0 ^ e2) = -e0 ^ e1 ^ e2
        assert_eq!(blade_sign(0b010, 0b101), -1);
    }

    #[test]
    fn berezin_examples() {
        let w = Multivector::blade(2, &[0, 1], real(5.0)).unwrap();
        assert_relative_eq!(berezin_integral(&w).re, -5.0 / PI, epsilon = 1e-15);
        let w = Multivector::<f64>::generator(2, 0).unwrap();
        assert_eq!(berezin_integral(&w).re, 0.0);
        let w = Multivector::blade(1, &[0], real(3.0)).unwrap();
        assert_relative_eq!(berezin_integral(&w).re, -3.0 / PI.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn wedge_is_anticommutative_on_generators() {
        let e0 = Multivector::<f64>::generator(3, 0).unwrap();
        let e1 = Multivector::<f64>::generator(3, 1).unwrap();
        let lhs = &e0 * &e1;
        let rhs = &e1 * &e0;
        assert_eq!(lhs, -&rhs);
        assert!((&e0 * &e0).is_zero());
    }

    #[test]
    fn pfaffian_small_cases() {
        let odd = AntisymMatrix::<f64>::antisymmetrize(&DMatrix::from_fn(3, 3, |i, j| {
            (i * 3 + j) as f64
        }))
        .unwrap();
        assert_eq!(pfaffian(&odd), 0.0);
        assert_eq!(pfaffian_berezin(&odd).unwrap(), 0.0);
        let two = AntisymMatrix::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.7, -1.7, 0.0])).unwrap();
        assert_relative_eq!(pfaffian(&two), 1.7);
        assert_relative_eq!(pfaffian_berezin(&two).unwrap(), 1.7, epsilon = 1e-13);
        let four = block(2.0, -3.0);
        assert_relative_eq!(pfaffian(&four), -6.0, epsilon = 1e-13);
        assert_relative_eq!(pfaffian_berezin(&four).unwrap(), -6.0, epsilon = 1e-12);
        let empty = AntisymMatrix::<f64>::new(DMatrix::zeros(0, 0)).unwrap();
        assert_eq!(pfaffian(&empty), 1.0);
    }

    #[test]
    fn rejects_non_antisymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0 + 1e-15, 0.0]);
        assert!(matches!(
            AntisymMatrix::new(m),
            Err(Error::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn exp_even_of_nilpotent_two_form() {
        // exp(a e01 + b e23) = 1 + a e01 + b e23 + ab e0123
        let w = &Multivector::blade(4, &[0, 1], real(2.0)).unwrap()
            + &Multivector::blade(4, &[2, 3], real(5.0)).unwrap();
        let e = w.exp_even();
        assert_relative_eq!(e.scalar_part().re, 1.0);
        assert_relative_eq!(e.top_coefficient().re, 10.0, epsilon = 1e-14);
        assert_eq!(e.grade(2), w);
    }

    #[test]
    fn partial_berezin_reads_fiber_top_component() {
        // generators: 0 = base 1-form, 1 = fiber
        let w = &Multivector::blade(2, &[0, 1], real(2.0)).unwrap()
            + &Multivector::blade(2, &[1], real(3.0)).unwrap();
        let out = berezin_partial(&w, 1).unwrap();
        let c = -1.0 / PI.sqrt();
        assert_relative_eq!(out.scalar_part().re, 3.0 * c, epsilon = 1e-15);
        assert_relative_eq!(out.coefficient(&[0]).re, 2.0 * c, epsilon = 1e-15);
    }
}
