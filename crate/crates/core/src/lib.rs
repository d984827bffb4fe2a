//! Torsion invariants of Morse-Smale flows twisted by flat bundles.
//!
//! The crate computes Milnor metrics on determinant lines of cochain
//! complexes, fuses them along filtrations, tracks them through Franks
//! surgery, evaluates twisted Ruelle zeta functions, and computes the
//! Ray-Singer metric of a flat bundle over the circle.
//!
//! Everything is generic over the real scalar (`f32` or `f64`) through
//! [`scalar::Real`]; `*F64` aliases below fix the common case.

pub mod algebra;
pub mod complex;
pub mod error;
pub mod flow;
pub mod rs_circle;
pub mod sampling;
pub mod scalar;
pub mod verify;
pub mod zeta;

pub use error::{Error, Result};

pub type CMatrixF64 = scalar::CMatrix<f64>;
pub type GramMetricF64 = algebra::GramMetric<f64>;
pub type CochainComplexF64 = complex::CochainComplex<f64>;
pub type GradedMetricF64 = complex::GradedMetric<f64>;
pub type FilteredComplexF64 = complex::FilteredComplex<f64>;
pub type MetricedDetLineF64 = complex::MetricedDetLine<f64>;
pub type MorseSmaleSystemF64 = flow::MorseSmaleSystem<f64>;
pub type ClosedOrbitDatumF64 = flow::ClosedOrbitDatum<f64>;
pub type FixedPointDatumF64 = flow::FixedPointDatum<f64>;
pub type ZetaSpecF64 = zeta::ZetaSpec<f64>;
pub type CircleRSSpecF64 = rs_circle::CircleRSSpec<f64>;
