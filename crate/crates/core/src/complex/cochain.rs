use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::algebra::GramMetric;
use crate::error::{Error, Result};
use crate::scalar::{all_finite, frobenius, lit, to_f64, CMatrix, Real};

/// Relative residual allowed for `d_{k+1} d_k` at construction.
pub const COMPLEX_TOL: f64 = 1e-12;

/// Finite-dimensional cochain complex `0 -> C^0 -> ... -> C^m -> 0`.
///
/// `d(k)` maps `C^k` to `C^{k+1}` and has shape `dims[k+1] x dims[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CochainComplex<T: Real> {
    dims: Vec<usize>,
    diffs: Vec<CMatrix<T>>,
}

impl<T: Real> CochainComplex<T> {
    pub fn new(dims: Vec<usize>, diffs: Vec<CMatrix<T>>) -> Result<Self> {
        Self::with_tolerance(dims, diffs, lit(COMPLEX_TOL))
    }

    /// Like [`new`](Self::new) but with a caller-chosen relative residual for
    /// `d^2 = 0`; used for complexes assembled from numerically computed maps.
    pub fn with_tolerance(dims: Vec<usize>, diffs: Vec<CMatrix<T>>, rel_tol: T) -> Result<Self> {
        let expected = dims.len().saturating_sub(1);
        if diffs.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "number of differentials",
                expected,
                found: diffs.len(),
            });
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.nrows() != dims[k + 1] {
                return Err(Error::DimensionMismatch {
                    context: "differential rows",
                    expected: dims[k + 1],
                    found: d.nrows(),
                });
            }
            if d.ncols() != dims[k] {
                return Err(Error::DimensionMismatch {
                    context: "differential columns",
                    expected: dims[k],
                    found: d.ncols(),
                });
            }
            if !all_finite(d) {
                return Err(Error::NonFinite("differential"));
            }
        }
        for k in 0..diffs.len().saturating_sub(1) {
            let residual = frobenius(&(&diffs[k + 1] * &diffs[k]));
            let scale = frobenius(&diffs[k + 1]) * frobenius(&diffs[k]);
            if residual > rel_tol * scale {
                return Err(Error::NotAComplex {
                    degree: k,
                    residual: to_f64(residual),
                });
            }
        }
        Ok(Self { dims, diffs })
    }

    /// Skips the `d^2 = 0` check; shapes must already be consistent.
    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, diffs: Vec<CMatrix<T>>) -> Self {
        debug_assert_eq!(diffs.len(), dims.len().saturating_sub(1));
        Self { dims, diffs }
    }

    /// Complex with the given dimensions and zero differentials.
    pub fn zero_differentials(dims: Vec<usize>) -> Self {
        let diffs = dims
            .windows(2)
            .map(|w| CMatrix::zeros(w[1], w[0]))
            .collect();
        Self { dims, diffs }
    }

    /// Two-term complex `C^a --d--> C^b` placed in degrees `shift`, `shift+1`.
    pub fn two_term(shift: usize, d: CMatrix<T>) -> Result<Self> {
        let mut dims = vec![0; shift + 2];
        dims[shift] = d.ncols();
        dims[shift + 1] = d.nrows();
        let mut diffs: Vec<CMatrix<T>> = dims
            .windows(2)
            .map(|w| CMatrix::zeros(w[1], w[0]))
            .collect();
        diffs[shift] = d;
        Self::new(dims, diffs)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, k: usize) -> usize {
        self.dims.get(k).copied().unwrap_or(0)
    }

    /// Number of degrees (`m + 1`).
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn differentials(&self) -> &[CMatrix<T>] {
        &self.diffs
    }

    /// `d_k : C^k -> C^{k+1}`; a zero map out of the top degree.
    pub fn d(&self, k: usize) -> CMatrix<T> {
        self.diffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.dim(k + 1), self.dim(k)))
    }

    /// `d_{k-1} : C^{k-1} -> C^k`; a zero map into degree 0.
    pub fn d_into(&self, k: usize) -> CMatrix<T> {
        if k == 0 {
            CMatrix::zeros(self.dim(0), 0)
        } else {
            self.d(k - 1)
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims
            .iter()
            .enumerate()
            .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    /// Direct sum `C ⊕ C'`, degree by degree.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let len = self.len().max(other.len());
        let dims: Vec<usize> = (0..len).map(|k| self.dim(k) + other.dim(k)).collect();
        let diffs = (0..len.saturating_sub(1))
            .map(|k| {
                let mut m = CMatrix::zeros(dims[k + 1], dims[k]);
                let a = self.d(k);
                let b = other.d(k);
                m.view_mut((0, 0), a.shape()).copy_from(&a);
                m.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(&b);
                m
            })
            .collect();
        Self { dims, diffs }
    }

    /// Image of the complex under the degreewise isomorphisms `phi[k]`:
    /// `d'_k = phi_{k+1} d_k phi_k^{-1}`.
    pub fn transported(&self, phi: &[CMatrix<T>]) -> Result<Self> {
        let inv: Vec<CMatrix<T>> = phi
            .iter()
            .map(|p| crate::algebra::linalg::inverse(p).ok_or(Error::NonFinite("singular chain isomorphism")))
            .collect::<Result<_>>()?;
        let diffs = (0..self.diffs.len())
            .map(|k| &phi[k + 1] * &self.diffs[k] * &inv[k])
            .collect();
        Self::with_tolerance(self.dims.clone(), diffs, lit(1e-9))
    }

    pub(crate) fn hash_into<H: Hasher>(&self, state: &mut H) {
        self.dims.hash(state);
        for d in &self.diffs {
            for z in d.iter() {
                to_f64(z.re).to_bits().hash(state);
                to_f64(z.im).to_bits().hash(state);
            }
        }
    }
}

/// One Hermitian metric per degree.
#[derive(Debug, Clone)]
pub struct GradedMetric<T: Real> {
    metrics: Vec<GramMetric<T>>,
}

impl<T: Real> GradedMetric<T> {
    pub fn new(metrics: Vec<GramMetric<T>>) -> Self {
        Self { metrics }
    }

    /// Standard Hermitian metric in every degree.
    pub fn standard(dims: &[usize]) -> Self {
        Self {
            metrics: dims.iter().map(|&n| GramMetric::identity(n)).collect(),
        }
    }

    pub fn degree(&self, k: usize) -> &GramMetric<T> {
        &self.metrics[k]
    }

    pub fn metrics(&self) -> &[GramMetric<T>] {
        &self.metrics
    }

    pub fn check_dims(&self, c: &CochainComplex<T>) -> Result<()> {
        if self.metrics.len() != c.len() {
            return Err(Error::DimensionMismatch {
                context: "graded metric degrees",
                expected: c.len(),
                found: self.metrics.len(),
            });
        }
        for (k, g) in self.metrics.iter().enumerate() {
            if g.dim() != c.dim(k) {
                return Err(Error::DimensionMismatch {
                    context: "graded metric dimension",
                    expected: c.dim(k),
                    found: g.dim(),
                });
            }
        }
        Ok(())
    }

    /// Multiplies the metric in degree `k` by `c > 0`.
    pub fn scaled_degree(&self, k: usize, c: T) -> Self {
        let mut out = self.clone();
        out.metrics[k] = out.metrics[k].scaled(c);
        out
    }

    pub(crate) fn hash_into<H: Hasher>(&self, state: &mut H) {
        for g in &self.metrics {
            for z in g.matrix().iter() {
                to_f64(z.re).to_bits().hash(state);
                to_f64(z.im).to_bits().hash(state);
            }
        }
    }
}

pub(crate) fn fingerprint<T: Real>(c: &CochainComplex<T>, g: &GradedMetric<T>) -> u64 {
    let mut h = DefaultHasher::new();
    c.hash_into(&mut h);
    g.hash_into(&mut h);
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cmatrix_from_rows;

    #[test]
    fn rejects_non_complex() {
        let d0 = cmatrix_from_rows::<f64>(1, 1, &[1.0]);
        let d1 = cmatrix_from_rows::<f64>(1, 1, &[1.0]);
        assert!(matches!(
            CochainComplex::new(vec![1, 1, 1], vec![d0, d1]),
            Err(Error::NotAComplex { degree: 0, .. })
        ));
    }

    #[test]
    fn rejects_bad_shapes() {
        let d0 = cmatrix_from_rows::<f64>(2, 1, &[1.0, 0.0]);
        assert!(CochainComplex::new(vec![1, 1], vec![d0]).is_err());
        assert!(CochainComplex::<f64>::new(vec![1, 1], vec![]).is_err());
    }

    #[test]
    fn direct_sum_is_blockwise() {
        let a = CochainComplex::two_term(0, cmatrix_from_rows::<f64>(1, 1, &[2.0])).unwrap();
        let b = CochainComplex::two_term(1, cmatrix_from_rows::<f64>(1, 1, &[3.0])).unwrap();
        let s = a.direct_sum(&b);
        assert_eq!(s.dims(), &[1, 2, 1]);
        assert_eq!(s.d(0)[(0, 0)].re, 2.0);
        assert_eq!(s.d(1)[(0, 1)].re, 3.0);
        assert_eq!(s.euler_characteristic(), 0);
    }
}
