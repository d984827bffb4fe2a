//! Determinant lines of cochain complexes and their metrics.
//!
//! For a metric complex `(C, g)` and cocycles `h^k` representing a basis of
//! `H^k`, the metric transported to `det H` through `det C ≅ det H` gives
//!
//! ```text
//! log ‖⊗_k (∧ h^k)^{(-1)^k}‖ = Σ_k (-1)^k log ‖d s^{k-1} ∧ h^k ∧ s^k‖_g
//! ```
//!
//! where `s^k` is any family of lifts completing `ker d_k` to `C^k`. With no
//! cohomology this is the norm of the canonical element.

use crate::algebra::linalg::log_wedge_norm_matrix;
use crate::algebra::Multivector;
use crate::error::{Error, Result};
use crate::scalar::{frobenius, lit, real, CMatrix, Real};

use super::cochain::{CochainComplex, GradedMetric};
use super::cohomology::{cohomology, whitened_spectra, CohomologyReport};

/// Largest total dimension accepted by the exterior-power oracle.
pub const ORACLE_MAX_TOTAL_DIM: usize = 24;

/// A generator of `det H(C)`: per degree, representative cocycles as
/// columns, read as `⊗_k (∧ columns_k)^{(-1)^k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetGenerator<T: Real> {
    pub reps: Vec<CMatrix<T>>,
}

impl<T: Real> DetGenerator<T> {
    pub fn new(reps: Vec<CMatrix<T>>) -> Self {
        Self { reps }
    }

    /// The canonical generator `1` of `det H = C` for an acyclic complex.
    pub fn unit(dims: &[usize]) -> Self {
        Self {
            reps: dims.iter().map(|&n| CMatrix::zeros(n, 0)).collect(),
        }
    }

    pub fn degree(&self, k: usize) -> Option<&CMatrix<T>> {
        self.reps.get(k)
    }

    /// Image under degreewise linear maps `phi[k]`.
    pub fn mapped(&self, phi: &[CMatrix<T>]) -> Self {
        Self {
            reps: self.reps.iter().zip(phi).map(|(r, p)| p * r).collect(),
        }
    }
}

/// A metric on a determinant line, carried as the log-norm of one generator.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricedDetLine<T: Real> {
    pub generator: DetGenerator<T>,
    pub log_norm: T,
}

impl<T: Real> MetricedDetLine<T> {
    pub fn norm(&self) -> T {
        self.log_norm.exp()
    }

    /// Log-norm of another generator of the same line `det H(c)`.
    pub fn log_norm_of(&self, c: &CochainComplex<T>, other: &DetGenerator<T>, tol: T) -> Result<T> {
        let std = GradedMetric::standard(c.dims());
        let ratio = transported_log_norm(c, &std, other, tol)?
            - transported_log_norm(c, &std, &self.generator, tol)?;
        Ok(self.log_norm + ratio)
    }

    /// Same metric, expressed on a different generator.
    pub fn rebase(&self, c: &CochainComplex<T>, other: &DetGenerator<T>, tol: T) -> Result<Self> {
        Ok(Self {
            log_norm: self.log_norm_of(c, other, tol)?,
            generator: other.clone(),
        })
    }
}

fn sign<T: Real>(k: usize) -> T {
    if k % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

fn check_cocycles<T: Real>(c: &CochainComplex<T>, gen: &DetGenerator<T>) -> Result<()> {
    if gen.reps.len() != c.len() {
        return Err(Error::DimensionMismatch {
            context: "generator degrees",
            expected: c.len(),
            found: gen.reps.len(),
        });
    }
    let rel: T = lit(1e-8);
    for (k, h) in gen.reps.iter().enumerate() {
        if h.nrows() != c.dim(k) {
            return Err(Error::DimensionMismatch {
                context: "representative length",
                expected: c.dim(k),
                found: h.nrows(),
            });
        }
        if h.ncols() == 0 {
            continue;
        }
        let d = c.d(k);
        let residual = frobenius(&(&d * h));
        if residual > rel * (frobenius(&d) * frobenius(h)).max(T::default_epsilon()) {
            return Err(Error::NotACocycle {
                degree: k,
                residual: crate::scalar::to_f64(residual),
            });
        }
    }
    Ok(())
}

/// Log-norm of the generator `gen` of `det H(c)` under the metric
/// transported from `g`. Lifts are the `g`-orthogonal complements of the
/// kernels.
pub fn transported_log_norm<T: Real>(
    c: &CochainComplex<T>,
    g: &GradedMetric<T>,
    gen: &DetGenerator<T>,
    tol: T,
) -> Result<T> {
    g.check_dims(c)?;
    check_cocycles(c, gen)?;
    let (svds, ranks) = whitened_spectra(c, g, tol)?;
    let mut acc = T::zero();
    let mut images = CMatrix::<T>::zeros(c.dim(0), 0);
    for k in 0..c.len() {
        let lifts = g.degree(k).unwhiten(&svds[k].coimage(ranks[k]));
        let reps = &gen.reps[k];
        let n = c.dim(k);
        let cols = images.ncols() + reps.ncols() + lifts.ncols();
        if cols != n {
            return Err(Error::NotACohomologyBasis { degree: k });
        }
        let mut frame = CMatrix::zeros(n, n);
        frame.columns_mut(0, images.ncols()).copy_from(&images);
        frame
            .columns_mut(images.ncols(), reps.ncols())
            .copy_from(reps);
        frame
            .columns_mut(images.ncols() + reps.ncols(), lifts.ncols())
            .copy_from(&lifts);
        let l = log_wedge_norm_matrix(&frame, g.degree(k))?;
        if !l.is_finite() {
            return Err(Error::NotACohomologyBasis { degree: k });
        }
        acc += sign::<T>(k) * l;
        images = c.d(k) * lifts;
    }
    Ok(acc)
}

/// `log` of the canonical-element norm for caller-chosen lifts `s^k`, whose
/// classes must form a basis of `C^k / d C^{k-1}`.
pub fn canonical_element_log_norm_with_lifts<T: Real>(
    c: &CochainComplex<T>,
    g: &GradedMetric<T>,
    lifts: &[CMatrix<T>],
) -> Result<T> {
    g.check_dims(c)?;
    if lifts.len() != c.len() {
        return Err(Error::DimensionMismatch {
            context: "lift degrees",
            expected: c.len(),
            found: lifts.len(),
        });
    }
    let mut acc = T::zero();
    let mut images = CMatrix::<T>::zeros(c.dim(0), 0);
    for k in 0..c.len() {
        let n = c.dim(k);
        let s = &lifts[k];
        if s.nrows() != n || images.ncols() + s.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "lifts do not complete the image",
                expected: n,
                found: images.ncols() + s.ncols(),
            });
        }
        let mut frame = CMatrix::zeros(n, n);
        frame.columns_mut(0, images.ncols()).copy_from(&images);
        frame.columns_mut(images.ncols(), s.ncols()).copy_from(s);
        let l = log_wedge_norm_matrix(&frame, g.degree(k))?;
        if !l.is_finite() {
            return Err(Error::NotAcyclic {
                betti: Vec::new(),
            });
        }
        acc += sign::<T>(k) * l;
        images = c.d(k) * s;
    }
    Ok(acc)
}

/// `log` of the norm of the canonical element of `det C` for an acyclic
/// metric complex.
pub fn canonical_element_log_norm<T: Real>(
    c: &CochainComplex<T>,
    g: &GradedMetric<T>,
    tol: T,
) -> Result<T> {
    let report = cohomology(c, g, tol)?;
    if !report.is_acyclic() {
        return Err(Error::NotAcyclic {
            betti: report.betti,
        });
    }
    transported_log_norm(c, g, &DetGenerator::unit(c.dims()), tol)
}

/// Norm of the canonical element of `det C` (the torsion of `(C, g)`).
pub fn canonical_element_norm<T: Real>(
    c: &CochainComplex<T>,
    g: &GradedMetric<T>,
    tol: T,
) -> Result<T> {
    Ok(canonical_element_log_norm(c, g, tol)?.exp())
}

/// Metric on `det H(c)` transported from `g`, on the generator formed by the
/// report's harmonic representatives.
pub fn det_metric<T: Real>(
    c: &CochainComplex<T>,
    g: &GradedMetric<T>,
    report: &CohomologyReport<T>,
    tol: T,
) -> Result<MetricedDetLine<T>> {
    if !report.matches(c, g) {
        return Err(Error::StaleReport);
    }
    let generator = DetGenerator::new(report.representatives.clone());
    let log_norm = transported_log_norm(c, g, &generator, tol)?;
    Ok(MetricedDetLine {
        generator,
        log_norm,
    })
}

fn wedge_columns<T: Real>(n: usize, m: &CMatrix<T>) -> Result<Multivector<T>> {
    let mut w = Multivector::scalar(n, real(T::one()))?;
    for col in m.column_iter() {
        let v: Vec<_> = col.iter().copied().collect();
        w = w.wedge(&Multivector::linear(&v)?);
    }
    Ok(w)
}

/// Independent evaluation of [`transported_log_norm`] that materializes each
/// `det C^k` as a top exterior power.
///
/// Lifts are picked greedily among standard basis vectors, the wedge is
/// expanded blade by blade and `‖e_1 ∧ ... ∧ e_n‖^2 = det g` is itself read
/// off a wedge. Only for total dimension up to [`ORACLE_MAX_TOTAL_DIM`].
pub fn wedge_oracle_log_norm<T: Real>(
    c: &CochainComplex<T>,
    g: &GradedMetric<T>,
    gen: &DetGenerator<T>,
) -> Result<T> {
    g.check_dims(c)?;
    check_cocycles(c, gen)?;
    if c.total_dim() > ORACLE_MAX_TOTAL_DIM {
        return Err(Error::DimensionMismatch {
            context: "wedge oracle total dimension",
            expected: ORACLE_MAX_TOTAL_DIM,
            found: c.total_dim(),
        });
    }
    let mut acc = T::zero();
    let mut images = CMatrix::<T>::zeros(c.dim(0), 0);
    for k in 0..c.len() {
        let n = c.dim(k);
        let mut w = wedge_columns(n, &images)?.wedge(&wedge_columns(n, &gen.reps[k])?);
        let mut lifts: Vec<usize> = Vec::new();
        let needed = n - images.ncols() - gen.reps[k].ncols();
        for _ in 0..needed {
            let mut best: Option<(usize, T, Multivector<T>)> = None;
            for j in (0..n).filter(|j| !lifts.contains(j)) {
                let cand = w.wedge(&Multivector::generator(n, j)?);
                let size = cand.coefficient_norm();
                if best.as_ref().is_none_or(|(_, b, _)| size > *b) {
                    best = Some((j, size, cand));
                }
            }
            let (j, _, cand) = best.ok_or(Error::NotACohomologyBasis { degree: k })?;
            lifts.push(j);
            w = cand;
        }
        let top = w.top_coefficient().modulus_checked();
        if top == T::zero() {
            return Err(Error::NotACohomologyBasis { degree: k });
        }
        let det_g = wedge_columns(n, g.degree(k).matrix())?.top_coefficient().re;
        acc += sign::<T>(k) * (top.ln() + det_g.ln() * lit(0.5));
        let mut s = CMatrix::zeros(n, lifts.len());
        for (col, &j) in lifts.iter().enumerate() {
            s[(j, col)] = real(T::one());
        }
        images = c.d(k) * s;
    }
    Ok(acc)
}

trait ModulusChecked<T> {
    fn modulus_checked(self) -> T;
}

impl<T: Real> ModulusChecked<T> for nalgebra::Complex<T> {
    fn modulus_checked(self) -> T {
        (self.re * self.re + self.im * self.im).sqrt()
    }
}
