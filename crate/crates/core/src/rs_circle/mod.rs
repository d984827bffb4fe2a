//! Ray-Singer metric of a unitary flat bundle on the circle.
//!
//! With holonomy eigenvalues `e^{2πiα_j}`, the twisted Laplacian on
//! functions and on one-forms has spectrum `{4π²(k + α_j)² : k ∈ Z}`, so its
//! zeta function is `(4π²)^{-s} [ζ(2s, α) + ζ(2s, 1 - α)]` per sector and
//! `det_ζ = exp(-ζ'(0)) = 4 sin²(πα)`. Only the one-form Laplacian carries
//! weight in the torsion, giving `‖1‖^{RS,2} = Π_j det_ζ(α_j)^{-1}`.

pub mod hurwitz;

use nalgebra::{Complex, ComplexField};

use crate::algebra::linalg::eigenvalues;
use crate::error::{Error, Result};
use crate::flow::{milnor_metric, ClosedOrbitDatum, CriticalElement, MorseSmaleSystem, Orientation, Sign};
use crate::scalar::{cplx, frobenius, lit, real, to_f64, CMatrix, Real};

pub use hurwitz::{hurwitz_zeta, HurwitzParams};

/// Allowed deviation `‖A^*A - 1‖` for a unitary holonomy.
pub const UNITARY_TOL: f64 = 1e-10;

/// Phases closer than this to 0 (mod 1) are treated as zero modes.
pub const ZERO_MODE_TOL: f64 = 1e-12;

/// `ζ'(0)` of the twisted Laplacian in the sector of phase `α`.
pub fn laplacian_zeta_derivative<T: Real>(alpha: T, p: HurwitzParams) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return if alpha == T::zero() {
            Err(Error::ZeroMode(0.0))
        } else {
            Err(Error::HurwitzShift(to_f64(alpha)))
        };
    }
    let zero = real(T::zero());
    let (z1, d1) = hurwitz_zeta(zero, alpha, p)?;
    let (z2, d2) = hurwitz_zeta(zero, T::one() - alpha, p)?;
    // d/ds [(4π²)^{-s} Z(2s)] at 0 = -ln(4π²) Z(0) + 2 Z'(0)
    let four_pi_sq = lit::<T>(4.0 * std::f64::consts::PI * std::f64::consts::PI);
    Ok(-four_pi_sq.ln() * (z1 + z2).re + lit::<T>(2.0) * (d1 + d2).re)
}

/// Zeta-regularized determinant of the twisted Laplacian, phase `α ∈ (0, 1)`.
pub fn zeta_reg_det<T: Real>(alpha: T, p: HurwitzParams) -> Result<T> {
    Ok((-laplacian_zeta_derivative(alpha, p)?).exp())
}

/// Unitary holonomy of a flat bundle on the circle, with its phases.
#[derive(Debug, Clone)]
pub struct CircleRSSpec<T: Real> {
    holonomy: CMatrix<T>,
    /// `α_j ∈ [0, 1)`, sorted, with eigenvalues `e^{2πiα_j}`.
    phases: Vec<T>,
}

fn phase_of<T: Real>(mu: Complex<T>) -> T {
    let tau = lit::<T>(std::f64::consts::TAU);
    let a = mu.argument() / tau;
    let a = if a < T::zero() { a + T::one() } else { a };
    if a >= T::one() {
        T::zero()
    } else {
        a
    }
}

impl<T: Real> CircleRSSpec<T> {
    pub fn from_unitary(holonomy: CMatrix<T>) -> Result<Self> {
        if !holonomy.is_square() {
            return Err(Error::NonSquare {
                rows: holonomy.nrows(),
                cols: holonomy.ncols(),
            });
        }
        let n = holonomy.nrows();
        let deviation = frobenius(&(holonomy.adjoint() * &holonomy - CMatrix::identity(n, n)));
        if !(deviation < lit(UNITARY_TOL)) {
            return Err(Error::NonUnitary {
                deviation: to_f64(deviation),
            });
        }
        let mut phases: Vec<T> = eigenvalues(&holonomy)?.into_iter().map(phase_of).collect();
        phases.sort_by(|a, b| a.partial_cmp(b).expect("finite phases"));
        Ok(Self { holonomy, phases })
    }

    /// Diagonal holonomy `diag(e^{2πiα_j})`; phases must lie in `[0, 1)`.
    pub fn from_phases(mut phases: Vec<T>) -> Result<Self> {
        if let Some(&bad) = phases.iter().find(|&&a| !(a >= T::zero() && a < T::one())) {
            return Err(Error::HurwitzShift(to_f64(bad)));
        }
        phases.sort_by(|a, b| a.partial_cmp(b).expect("finite phases"));
        let tau = lit::<T>(std::f64::consts::TAU);
        let n = phases.len();
        let mut holonomy = CMatrix::zeros(n, n);
        for (j, &a) in phases.iter().enumerate() {
            holonomy[(j, j)] = cplx((tau * a).cos(), (tau * a).sin());
        }
        Ok(Self { holonomy, phases })
    }

    pub fn holonomy(&self) -> &CMatrix<T> {
        &self.holonomy
    }

    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    pub fn rank(&self) -> usize {
        self.phases.len()
    }

    fn check_acyclic(&self) -> Result<()> {
        let eps = lit::<T>(ZERO_MODE_TOL);
        match self.phases.iter().find(|&&a| a < eps || a > T::one() - eps) {
            Some(&a) => Err(Error::ZeroMode(to_f64(a))),
            None => Ok(()),
        }
    }
}

/// `log ‖1‖^{RS,2} = -Σ_j log det_ζ(α_j)`.
pub fn rs_log_norm_sq_circle<T: Real>(spec: &CircleRSSpec<T>, p: HurwitzParams) -> Result<T> {
    spec.check_acyclic()?;
    spec.phases.iter().try_fold(T::zero(), |acc, &a| {
        Ok(acc + laplacian_zeta_derivative(a, p)?)
    })
}

/// `‖1‖^{RS,2}` for an acyclic unitary holonomy.
pub fn rs_norm_circle<T: Real>(spec: &CircleRSSpec<T>, p: HurwitzParams) -> Result<T> {
    Ok(rs_log_norm_sq_circle(spec, p)?.exp())
}

/// Ray-Singer and Milnor norms of the canonical section on the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BzCheck<T: Real> {
    /// `‖1‖^{RS,2}`.
    pub rs: T,
    /// `‖1‖^{M,2}` for the rotation flow.
    pub milnor: T,
    /// `|log rs - log milnor|`.
    pub residual: T,
}

/// Compares `‖1‖^{RS,2}` with the squared Milnor norm of the rotation flow,
/// a single untwisted closed orbit of index 0 with holonomy `A`.
pub fn bz_check_circle<T: Real>(spec: &CircleRSSpec<T>, p: HurwitzParams, tol: T) -> Result<BzCheck<T>> {
    let log_rs = rs_log_norm_sq_circle(spec, p)?;
    let orbit = ClosedOrbitDatum::new(
        "rotation",
        0,
        T::one(),
        Sign::Plus,
        spec.holonomy.clone(),
        Orientation::Positive,
    )?;
    let sys = MorseSmaleSystem::new(spec.rank(), vec![CriticalElement::Orbit(orbit)], None, true)?;
    let log_milnor = milnor_metric(&sys, tol)?.log_norm_of_unit(tol)? * lit(2.0);
    Ok(BzCheck {
        rs: log_rs.exp(),
        milnor: log_milnor.exp(),
        residual: (log_rs - log_milnor).abs(),
    })
}
