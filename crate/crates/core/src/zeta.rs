//! Ruelle dynamical zeta function of finitely many closed orbits,
//!
//! ```text
//! R(s) = Π_γ det(1 - Δ(γ) ρ(γ)^{-1} e^{-s ℓ_γ})^{(-1)^{ind γ}}
//! ```
//!
//! with the inverse holonomy, as for the dual bundle. Each factor splits over
//! the eigenvalues `μ` of the twisted holonomy `Δρ`, so zeros and poles sit
//! exactly at `e^{-s ℓ} = μ`.

use std::f64::consts::TAU;

use nalgebra::{Complex, ComplexField};

use crate::algebra::linalg::{eigenvalues, log_abs_det};
use crate::error::{Error, Result};
use crate::flow::system::{check_invertible, parity};
use crate::flow::{milnor_metric, MorseSmaleSystem, Sign};
use crate::scalar::{cplx, lit, real, to_f64, CMatrix, Real};

/// Default threshold on `|1 - μ^{-1} e^{-s ℓ}|` for a vanishing factor.
pub const ORDER_TOL: f64 = 1e-8;

/// Locations closer than this are merged by [`zeros_poles_in_rect`].
pub const MERGE_TOL: f64 = 1e-9;

/// One orbit's contribution to the zeta function.
#[derive(Debug, Clone)]
pub struct ZetaOrbit<T: Real> {
    pub id: String,
    pub period: T,
    pub index: usize,
    pub twist: Sign,
    /// Holonomy along the orbit's orientation.
    pub holonomy: CMatrix<T>,
}

impl<T: Real> ZetaOrbit<T> {
    /// `Δ ρ`.
    pub fn twisted_holonomy(&self) -> CMatrix<T> {
        &self.holonomy * real(self.twist.value::<T>())
    }

    fn sign(&self) -> i64 {
        if self.index % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZetaSpec<T: Real> {
    pub rank: usize,
    pub orbits: Vec<ZetaOrbit<T>>,
}

impl<T: Real> ZetaSpec<T> {
    pub fn new(rank: usize, orbits: Vec<ZetaOrbit<T>>) -> Result<Self> {
        for o in &orbits {
            if !(o.period.is_finite() && o.period > T::zero()) {
                return Err(Error::InvalidDatum {
                    id: o.id.clone(),
                    reason: format!("period {} is not positive", to_f64(o.period)),
                });
            }
            if o.holonomy.nrows() != rank || o.holonomy.ncols() != rank {
                return Err(Error::DimensionMismatch {
                    context: "zeta holonomy",
                    expected: rank,
                    found: o.holonomy.nrows(),
                });
            }
            if !check_invertible(&o.holonomy) {
                return Err(Error::SingularHolonomy(o.id.clone()));
            }
        }
        Ok(Self { rank, orbits })
    }

    /// The orbits of a system, with holonomies along their declared
    /// orientations.
    pub fn from_system(sys: &MorseSmaleSystem<T>) -> Self {
        let orbits = sys
            .orbits()
            .map(|o| ZetaOrbit {
                id: o.id.clone(),
                period: o.period,
                index: o.index,
                twist: o.twist,
                holonomy: o.oriented_holonomy(),
            })
            .collect();
        Self {
            rank: sys.rank(),
            orbits,
        }
    }

    /// Same orbits with every holonomy conjugated by `p`.
    pub fn conjugated(&self, p: &CMatrix<T>) -> Option<Self> {
        let inv = p.clone().try_inverse()?;
        Some(Self {
            rank: self.rank,
            orbits: self
                .orbits
                .iter()
                .map(|o| ZetaOrbit {
                    holonomy: p * &o.holonomy * &inv,
                    ..o.clone()
                })
                .collect(),
        })
    }
}

/// Value of the zeta function: finite, or a pole of the given order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZetaValue<T: Real> {
    Finite(Complex<T>),
    Pole { order: u32 },
}

impl<T: Real> ZetaValue<T> {
    pub fn finite(self) -> Option<Complex<T>> {
        match self {
            ZetaValue::Finite(z) => Some(z),
            ZetaValue::Pole { .. } => None,
        }
    }
}

fn exp_c<T: Real>(z: Complex<T>) -> Complex<T> {
    z.exp()
}

/// Per orbit, `μ^{-1} e^{-s ℓ}` for each eigenvalue `μ` of `Δρ`.
fn eigen_factors<T: Real>(spec: &ZetaSpec<T>, s: Complex<T>) -> Result<Vec<(usize, Vec<Complex<T>>)>> {
    spec.orbits
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let e = exp_c(-s * real(o.period));
            let mus = eigenvalues(&o.twisted_holonomy())?;
            Ok((i, mus.into_iter().map(|mu| e / mu).collect()))
        })
        .collect()
}

/// Signed count of vanishing factors at `s0`: positive for a zero, negative
/// for a pole.
pub fn order_at<T: Real>(spec: &ZetaSpec<T>, s0: Complex<T>, tol: T) -> Result<i64> {
    let mut order = 0;
    for (i, ws) in eigen_factors(spec, s0)? {
        for w in ws {
            let gap = (real::<T>(T::one()) - w).modulus();
            if gap >= tol && gap <= tol * lit(10.0) {
                return Err(Error::IllConditionedOrder { gap: to_f64(gap) });
            }
            if gap < tol {
                order += spec.orbits[i].sign();
            }
        }
    }
    Ok(order)
}

/// `R(s)` through the eigenvalue factorization. At a point where zero and
/// pole factors cancel, returns the limit, each vanishing factor
/// `1 - μ^{-1} e^{-sℓ}` being replaced by its derivative `ℓ μ^{-1} e^{-sℓ}`.
pub fn ruelle_eval<T: Real>(spec: &ZetaSpec<T>, s: Complex<T>, tol: T) -> Result<ZetaValue<T>> {
    let order = order_at(spec, s, tol)?;
    if order < 0 {
        return Ok(ZetaValue::Pole {
            order: (-order) as u32,
        });
    }
    if order > 0 {
        return Ok(ZetaValue::Finite(real(T::zero())));
    }
    let mut value = real::<T>(T::one());
    for (i, ws) in eigen_factors(spec, s)? {
        let o = &spec.orbits[i];
        for w in ws {
            let f = real::<T>(T::one()) - w;
            let factor = if f.modulus() < tol { w * real(o.period) } else { f };
            value = if o.sign() > 0 { value * factor } else { value / factor };
        }
    }
    Ok(ZetaValue::Finite(value))
}

/// `log |R(s)|` as the signed sum of `log |det(1 - Δρ^{-1} e^{-sℓ})|`,
/// computed from the matrices directly. `-inf`/`+inf` at zeros and poles.
pub fn log_abs_ruelle<T: Real>(spec: &ZetaSpec<T>, s: Complex<T>) -> Result<T> {
    let mut acc = T::zero();
    for o in &spec.orbits {
        let inv = o
            .twisted_holonomy()
            .try_inverse()
            .ok_or_else(|| Error::SingularHolonomy(o.id.clone()))?;
        let m = CMatrix::identity(spec.rank, spec.rank) - inv * exp_c(-s * real(o.period));
        acc += parity::<T>(o.index) * log_abs_det(&m)?;
    }
    Ok(acc)
}

/// Closed rectangle `[re_min, re_max] x [im_min, im_max]` in the `s` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T: Real> {
    pub re_min: T,
    pub re_max: T,
    pub im_min: T,
    pub im_max: T,
}

/// A zero (positive order) or pole (negative order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPole<T: Real> {
    pub s: Complex<T>,
    pub order: i64,
}

/// All zeros and poles in `rect`: for each eigenvalue `μ` of `Δρ`, the
/// points `s = -(ln|μ| + i(arg μ + 2πk)) / ℓ`. Coincident points are merged
/// with their orders summed; points of total order 0 are dropped. Sorted by
/// imaginary, then real part.
pub fn zeros_poles_in_rect<T: Real>(spec: &ZetaSpec<T>, rect: Rect<T>) -> Result<Vec<ZeroPole<T>>> {
    let mut found: Vec<ZeroPole<T>> = Vec::new();
    for o in &spec.orbits {
        let l = to_f64(o.period);
        for mu in eigenvalues(&o.twisted_holonomy())? {
            let (m, arg) = (to_f64(mu.modulus()), to_f64(mu.argument()));
            let re = -m.ln() / l;
            if re < to_f64(rect.re_min) || re > to_f64(rect.re_max) {
                continue;
            }
            // im = -(arg + 2πk)/ℓ in [im_min, im_max]
            let k_lo = ((-to_f64(rect.im_max) * l - arg) / TAU).ceil() as i64;
            let k_hi = ((-to_f64(rect.im_min) * l - arg) / TAU).floor() as i64;
            for k in k_lo..=k_hi {
                let im = -(arg + TAU * k as f64) / l;
                let s = cplx(lit(re), lit(im));
                match found
                    .iter_mut()
                    .find(|z| to_f64((z.s - s).modulus()) < MERGE_TOL)
                {
                    Some(z) => z.order += o.sign(),
                    None => found.push(ZeroPole { s, order: o.sign() }),
                }
            }
        }
    }
    found.retain(|z| z.order != 0);
    found.sort_by(|a, b| {
        (to_f64(a.s.im), to_f64(a.s.re))
            .partial_cmp(&(to_f64(b.s.im), to_f64(b.s.re)))
            .expect("finite locations")
    });
    Ok(found)
}

/// Both sides of `‖1‖^M = |R(0)|^{-1}` for a system of closed orbits only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropCheck<T: Real> {
    pub milnor: T,
    pub zeta_inverse: T,
    /// `|log ‖1‖^M + log |R(0)||`.
    pub residual: T,
}

/// Checks that the Milnor norm of the canonical section equals
/// `|R(0)|^{-1}`. Requires no fixed points and no eigenvalue of any
/// twisted holonomy at 1 (within [`ORDER_TOL`]).
pub fn check_prop<T: Real>(sys: &MorseSmaleSystem<T>, tol: T) -> Result<PropCheck<T>> {
    if let Some(x) = sys.fixed_points().next() {
        return Err(Error::HypothesisViolation {
            id: x.id.clone(),
            reason: "system has a fixed point".into(),
        });
    }
    for o in sys.orbits() {
        for mu in eigenvalues(&o.twisted_holonomy())? {
            if (mu - real(T::one())).modulus() < lit(ORDER_TOL) {
                return Err(Error::HypothesisViolation {
                    id: o.id.clone(),
                    reason: "twist is an eigenvalue of the holonomy".into(),
                });
            }
        }
    }
    let log_milnor = milnor_metric(sys, tol)?.log_norm_of_unit(tol)?;
    let log_zeta = log_abs_ruelle(&ZetaSpec::from_system(sys), real(T::zero()))?;
    Ok(PropCheck {
        milnor: log_milnor.exp(),
        zeta_inverse: (-log_zeta).exp(),
        residual: (log_milnor + log_zeta).abs(),
    })
}
