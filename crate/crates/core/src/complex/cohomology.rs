//! Cohomology with harmonic representatives.
//!
//! All rank decisions happen in whitened coordinates (`u = L^* v` for
//! `g = L L^*`), where the supplied metric becomes the standard one. The
//! harmonic space in degree `k` is then `ker d_k ⊖ im d_{k-1}`.

use crate::algebra::Svd;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, CMatrix, Real};

use super::cochain::{fingerprint, CochainComplex, GradedMetric};

/// Betti numbers and metric-orthonormal harmonic representatives.
#[derive(Debug, Clone)]
pub struct CohomologyReport<T: Real> {
    pub betti: Vec<usize>,
    /// Ranks of the differentials `d_k`.
    pub ranks: Vec<usize>,
    /// Per degree, representatives as columns in the complex's coordinates.
    pub representatives: Vec<CMatrix<T>>,
    pub(crate) fingerprint: u64,
}

impl<T: Real> CohomologyReport<T> {
    pub fn is_acyclic(&self) -> bool {
        self.betti.iter().all(|&b| b == 0)
    }

    /// True when the report was produced from exactly `(c, g)`.
    pub fn matches(&self, c: &CochainComplex<T>, g: &GradedMetric<T>) -> bool {
        self.fingerprint == fingerprint(c, g)
    }
}

/// Differential `d_k` in whitened coordinates.
pub(crate) fn whitened_d<T: Real>(c: &CochainComplex<T>, g: &GradedMetric<T>, k: usize) -> CMatrix<T> {
    let d = c.d(k);
    if d.nrows() == 0 || d.ncols() == 0 {
        return d;
    }
    let right = g.degree(k).unwhiten(&CMatrix::identity(c.dim(k), c.dim(k)));
    g.degree(k + 1).whiten(&(d * right))
}

/// Per-degree SVDs of the whitened differentials and their checked ranks.
pub(crate) fn whitened_spectra<T: Real>(
    c: &CochainComplex<T>,
    g: &GradedMetric<T>,
    tol: T,
) -> Result<(Vec<Svd<T>>, Vec<usize>)> {
    let mut svds = Vec::with_capacity(c.len());
    let mut ranks = Vec::with_capacity(c.len());
    for k in 0..c.len() {
        let svd = Svd::new(&whitened_d(c, g, k));
        ranks.push(svd.checked_rank(tol, "cohomology")?);
        svds.push(svd);
    }
    Ok((svds, ranks))
}

/// Cohomology of `c` with representatives harmonic for `g`.
pub fn cohomology<T: Real>(
    c: &CochainComplex<T>,
    g: &GradedMetric<T>,
    tol: T,
) -> Result<CohomologyReport<T>> {
    g.check_dims(c)?;
    let (svds, ranks) = whitened_spectra(c, g, tol)?;
    let mut betti = Vec::with_capacity(c.len());
    let mut representatives = Vec::with_capacity(c.len());
    for k in 0..c.len() {
        let cycles = svds[k].kernel(ranks[k]);
        let prev_rank = if k == 0 { 0 } else { ranks[k - 1] };
        if prev_rank > cycles.ncols() {
            return Err(Error::IllConditionedRank {
                context: "cohomology: image exceeds kernel",
                below: cycles.ncols() as f64,
                above: prev_rank as f64,
                cutoff: to_f64(tol),
            });
        }
        let harmonic_white = if prev_rank == 0 {
            cycles
        } else {
            let boundaries = svds[k - 1].image(prev_rank);
            let overlap = boundaries.adjoint() * &cycles;
            let inner = Svd::new(&overlap);
            // Boundaries lie inside the cycles, so these singular values are ~1.
            if inner.sigma.get(prev_rank - 1).copied().unwrap_or_else(T::zero) < lit(0.5) {
                return Err(Error::IllConditionedRank {
                    context: "cohomology: boundaries not contained in cycles",
                    below: to_f64(inner.sigma.get(prev_rank - 1).copied().unwrap_or_else(T::zero)),
                    above: 1.0,
                    cutoff: 0.5,
                });
            }
            &cycles * inner.kernel(prev_rank)
        };
        betti.push(harmonic_white.ncols());
        representatives.push(g.degree(k).unwhiten(&harmonic_white));
    }
    Ok(CohomologyReport {
        betti,
        ranks,
        representatives,
        fingerprint: fingerprint(c, g),
    })
}

/// Betti numbers only, with the standard metric.
pub fn betti_numbers<T: Real>(c: &CochainComplex<T>, tol: T) -> Result<Vec<usize>> {
    Ok(cohomology(c, &GradedMetric::standard(c.dims()), tol)?.betti)
}
