//! Scalar abstraction.
//!
//! Everything numeric in the crate is generic over a real field `T`
//! (`f32` or `f64`); cochains, holonomies and zeta values live in
//! `Complex<T>`.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the crate is generic over.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {}

impl Real for f32 {}
impl Real for f64 {}

/// Complex matrix with entries over `T`.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Complex column vector with entries over `T`.
pub type CVector<T> = DVector<Complex<T>>;

/// Lossless-enough conversion of an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in T")
}

/// Converts a real into `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// True when every entry of `m` is finite.
pub fn all_finite<T: Real>(m: &CMatrix<T>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Frobenius norm of a complex matrix.
pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
        .sqrt()
}

/// Real matrix lifted to complex entries.
pub fn complexify<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    m.map(real)
}

/// Builds a complex matrix from row-major `f64` entries (imaginary part zero).
pub fn cmatrix_from_rows<T: Real>(rows: usize, cols: usize, data: &[f64]) -> CMatrix<T> {
    assert_eq!(data.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| real(lit(data[i * cols + j])))
}
