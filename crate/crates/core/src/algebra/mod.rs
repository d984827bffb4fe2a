//! Scalar, matrix and exterior-algebra substrate.

pub mod exterior;
pub mod linalg;
pub mod mathai_quillen;

pub use exterior::{
    berezin_integral, berezin_partial, pfaffian, pfaffian_berezin, AntisymMatrix, Multivector,
};
pub use linalg::{det, kernel_basis, log_abs_det, wedge_gram_norm, GramMetric, Svd, DEFAULT_RANK_TOL};
pub use mathai_quillen::{beta_rank_one, psi_dim_one};
