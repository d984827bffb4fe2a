//! Franks surgery: each closed orbit is replaced by two fixed points of
//! adjacent indices joined by two heteroclinic curves `a`, `a'`.

use std::collections::BTreeMap;

use crate::algebra::{log_abs_det, GramMetric};
use crate::complex::{CochainComplex, FilteredComplex};
use crate::error::{Error, Result};
use crate::scalar::{lit, real, CMatrix, Real};

use super::milnor::milnor_metric;
use super::system::{
    check_invertible, parity, ClosedOrbitDatum, CriticalElement, FixedPointDatum,
    MorseSmaleSystem, Sign,
};

/// Surgery data for one orbit.
#[derive(Debug, Clone)]
pub struct SurgeryDatum<T: Real> {
    /// Parallel transport `τ(a')` along the curve `a'`.
    pub tau: CMatrix<T>,
    pub n_a: Sign,
    pub n_a_prime: Sign,
    /// Fiber metric at the new fixed point `x` of index `ind + 1`.
    pub gram_x: GramMetric<T>,
    /// Fiber metric at the new fixed point `x'` of index `ind`.
    pub gram_x_prime: GramMetric<T>,
}

pub type SurgeryMap<T> = BTreeMap<String, SurgeryDatum<T>>;

/// Ids given to the fixed points that replace orbit `id`.
pub fn surgered_ids(id: &str) -> (String, String) {
    (format!("{id}.x_prime"), format!("{id}.x"))
}

fn checked<'a, T: Real>(o: &ClosedOrbitDatum<T>, surgery: &'a SurgeryMap<T>) -> Result<&'a SurgeryDatum<T>> {
    let s = surgery
        .get(&o.id)
        .ok_or_else(|| Error::MissingSurgery(o.id.clone()))?;
    if s.n_a * s.n_a_prime != -o.twist {
        return Err(Error::SignConstraint(o.id.clone()));
    }
    let r = o.rank();
    if s.tau.nrows() != r || s.tau.ncols() != r || !check_invertible(&s.tau) {
        return Err(Error::SingularTransport(o.id.clone()));
    }
    for g in [&s.gram_x, &s.gram_x_prime] {
        if g.dim() != r {
            return Err(Error::DimensionMismatch {
                context: "surgery gram",
                expected: r,
                found: g.dim(),
            });
        }
    }
    Ok(s)
}

/// Differential `F_{x'} -> F_x` of the surgered model,
/// `n(a) τ(a)^{-1} + n(a') τ(a')^{-1}` with `τ(a) = ρ τ(a')` and `ρ` the
/// holonomy along the declared orientation.
pub fn surgered_block<T: Real>(o: &ClosedOrbitDatum<T>, s: &SurgeryDatum<T>) -> CMatrix<T> {
    let tau_prime_inv = s.tau.clone().try_inverse().expect("transport validated invertible");
    let tau_a_inv = &tau_prime_inv
        * o.oriented_holonomy()
            .try_inverse()
            .expect("holonomy validated invertible");
    tau_a_inv * real(s.n_a.value::<T>()) + tau_prime_inv * real(s.n_a_prime.value::<T>())
}

/// Result of [`franks_surgery`].
#[derive(Debug, Clone)]
pub struct Surgered<T: Real> {
    pub system: MorseSmaleSystem<T>,
    /// Degreewise chain isomorphism from the original model to the surgered
    /// one (coordinates are shared; only the orbits' upper blocks change).
    pub phi: Vec<CMatrix<T>>,
}

/// Replaces every orbit by the fixed points `x'` (index `ind`) and `x`
/// (index `ind + 1`) on two consecutive levels.
pub fn franks_surgery<T: Real>(sys: &MorseSmaleSystem<T>, surgery: &SurgeryMap<T>) -> Result<Surgered<T>> {
    let model = sys.model()?;
    let c = model.complex();
    let degrees = c.len();

    let mut new_level = Vec::with_capacity(sys.elements().len());
    let mut elements = Vec::new();
    for e in sys.elements() {
        new_level.push(elements.len());
        match e {
            CriticalElement::Fixed(x) => elements.push(CriticalElement::Fixed(x.clone())),
            CriticalElement::Orbit(o) => {
                let s = checked(o, surgery)?;
                let (xp, x) = surgered_ids(&o.id);
                elements.push(CriticalElement::Fixed(FixedPointDatum::new(xp, o.index, s.gram_x_prime.clone())));
                elements.push(CriticalElement::Fixed(FixedPointDatum::new(x, o.index + 1, s.gram_x.clone())));
            }
        }
    }

    let mut phi: Vec<CMatrix<T>> = (0..degrees).map(|k| CMatrix::identity(c.dim(k), c.dim(k))).collect();
    let mut levels: Vec<Vec<usize>> = model
        .levels()
        .iter()
        .map(|lv| lv.iter().map(|&l| new_level[l]).collect())
        .collect();
    let mut blocks = Vec::new();
    for (p, e) in sys.elements().iter().enumerate() {
        if let CriticalElement::Orbit(o) = e {
            let s = checked(o, surgery)?;
            let upper: Vec<usize> = (0..c.dim(o.index + 1)).filter(|&j| model.level(o.index + 1, j) == p).collect();
            let lower: Vec<usize> = (0..c.dim(o.index)).filter(|&j| model.level(o.index, j) == p).collect();
            // Φ acts on the upper block by M = -n(a') τ(a')^{-1}
            let m = s.tau.clone().try_inverse().expect("validated") * real(-s.n_a_prime.value::<T>());
            for (a, &i) in upper.iter().enumerate() {
                for (b, &j) in upper.iter().enumerate() {
                    phi[o.index + 1][(i, j)] = m[(a, b)];
                }
                levels[o.index + 1][i] = new_level[p] + 1;
            }
            blocks.push((o.index, upper, lower, surgered_block(o, s)));
        }
    }
    let transported = c.transported(&phi)?;
    let mut diffs = transported.differentials().to_vec();
    for (k, upper, lower, block) in blocks {
        for (a, &i) in upper.iter().enumerate() {
            for (b, &j) in lower.iter().enumerate() {
                diffs[k][(i, j)] = block[(a, b)];
            }
        }
    }
    let complex = CochainComplex::with_tolerance(c.dims().to_vec(), diffs, lit(1e-9))?;
    let model = FilteredComplex::new(complex, levels, elements.len().max(1))?;
    let system = MorseSmaleSystem::with_dimension(sys.rank(), elements, Some(model), false, sys.manifold_dim())?;
    Ok(Surgered { system, phi })
}

/// `Σ_γ (-1)^{ind γ} log ‖det τ(a'_γ)‖^2`, with the norm on
/// `det F_{x'} ⊗ (det F_x)^{-1}` induced by the fiber metrics.
pub fn franks_comparison_rhs<T: Real>(sys: &MorseSmaleSystem<T>, surgery: &SurgeryMap<T>) -> Result<T> {
    let mut acc = T::zero();
    for o in sys.orbits() {
        let s = checked(o, surgery)?;
        let term = log_abs_det(&s.tau)? * lit(2.0) + s.gram_x_prime.log_det() - s.gram_x.log_det();
        acc += parity::<T>(o.index) * term;
    }
    Ok(acc)
}

/// Both sides of the comparison formula for Milnor metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MilnorComparison<T: Real> {
    /// `log ‖·‖^2_{after} - log ‖·‖^2_{before}` on a common generator.
    pub lhs: T,
    pub rhs: T,
    pub residual: T,
}

/// Compares the Milnor metrics before and after surgery on the generator
/// of the original metric carried across by the chain isomorphism.
pub fn compare_milnor<T: Real>(
    sys: &MorseSmaleSystem<T>,
    surgery: &SurgeryMap<T>,
    tol: T,
) -> Result<MilnorComparison<T>> {
    let before = milnor_metric(sys, tol)?;
    let surgered = franks_surgery(sys, surgery)?;
    let after = milnor_metric(&surgered.system, tol)?;
    if before.betti != after.betti {
        return Err(Error::CohomologyChanged {
            before: before.betti,
            after: after.betti,
        });
    }
    let generator = before.line.generator.mapped(&surgered.phi);
    let l_after = after.line.log_norm_of(&after.complex, &generator, tol)?;
    let lhs = (l_after - before.line.log_norm) * lit(2.0);
    let rhs = franks_comparison_rhs(sys, surgery)?;
    Ok(MilnorComparison {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}
