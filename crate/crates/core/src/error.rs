use thiserror::Error;

/// Errors raised by the numerical and combinatorial routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("Gram matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("Gram matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is not antisymmetric (deviation {deviation:e})")]
    NotAntisymmetric { deviation: f64 },

    #[error("multivector generator count {found} exceeds the supported maximum {max}")]
    TooManyGenerators { found: usize, max: usize },

    #[error("Mathai-Quillen current is singular on the zero section")]
    ZeroSection,

    #[error("differentials do not compose to zero at degree {degree} (residual {residual:e})")]
    NotAComplex { degree: usize, residual: f64 },

    #[error("ill-conditioned rank in {context}: singular values {below:e} and {above:e} straddle cutoff {cutoff:e}")]
    IllConditionedRank {
        context: &'static str,
        below: f64,
        above: f64,
        cutoff: f64,
    },

    #[error("complex is not acyclic (Betti numbers {betti:?})")]
    NotAcyclic { betti: Vec<usize> },

    #[error("cohomology report was computed for a different complex or metric")]
    StaleReport,

    #[error("representatives in degree {degree} are not cocycles (residual {residual:e})")]
    NotACocycle { degree: usize, residual: f64 },

    #[error("representatives in degree {degree} do not form a basis of cohomology")]
    NotACohomologyBasis { degree: usize },

    #[error("filtration not respected: {0}")]
    FiltrationNotRespected(String),

    #[error("invalid datum `{id}`: {reason}")]
    InvalidDatum { id: String, reason: String },

    #[error("singular holonomy on orbit `{0}`")]
    SingularHolonomy(String),

    #[error("chain model does not realize the graded cohomology of `{id}` at level {level}: {reason}")]
    ModelMismatch {
        level: usize,
        id: String,
        reason: String,
    },

    #[error("system has neither a chain model nor the split flag")]
    NoChainModel,

    #[error("surgery data missing for orbit `{0}`")]
    MissingSurgery(String),

    #[error("surgery sign constraint n(a)n(a') = -twist violated for orbit `{0}`")]
    SignConstraint(String),

    #[error("singular transport on orbit `{0}`")]
    SingularTransport(String),

    #[error("surgery changed cohomology: {before:?} became {after:?}")]
    CohomologyChanged { before: Vec<usize>, after: Vec<usize> },

    #[error("ill-conditioned order at s0: eigenvalue gap {gap:e} within [tol, 10 tol]")]
    IllConditionedOrder { gap: f64 },

    #[error("hypothesis violated by `{id}`: {reason}")]
    HypothesisViolation { id: String, reason: String },

    #[error("Hurwitz zeta has a pole at s = 1")]
    HurwitzPole,

    #[error("invalid Hurwitz parameters: {0}")]
    InvalidHurwitzParams(String),

    #[error("Hurwitz parameter a = {0} outside (0, 1]")]
    HurwitzShift(f64),

    #[error("zero mode present (phase {0}); the acyclic sector requires phases in (0, 1)")]
    ZeroMode(f64),

    #[error("holonomy is not unitary (deviation {deviation:e})")]
    NonUnitary { deviation: f64 },

    #[error("eigenvalue decomposition failed")]
    EigenFailure,
}

pub type Result<T> = std::result::Result<T, Error>;
