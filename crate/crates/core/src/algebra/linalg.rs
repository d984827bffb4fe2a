//! Dense complex linear algebra: determinants, numerical rank, kernels and
//! Hermitian metrics.

use nalgebra::{Cholesky, Complex, ComplexField, DMatrix, Dyn};

use crate::error::{Error, Result};
use crate::scalar::{all_finite, frobenius, lit, real, to_f64, CMatrix, CVector, Real};

/// Default relative singular-value cutoff for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Determinant of a square complex matrix via LU with partial pivoting.
pub fn det<T: Real>(m: &CMatrix<T>) -> Result<Complex<T>> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if !all_finite(m) {
        return Err(Error::NonFinite("det"));
    }
    if m.nrows() == 0 {
        return Ok(real(T::one()));
    }
    Ok(m.clone().lu().determinant())
}

/// `log |det m|`; `-inf` for singular input.
pub fn log_abs_det<T: Real>(m: &CMatrix<T>) -> Result<T> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Ok(T::zero());
    }
    // Sum of logs of the LU pivots avoids overflow of the raw product.
    let lu = m.clone().lu();
    let u = lu.u();
    let mut acc = T::zero();
    for i in 0..u.nrows() {
        let p = u[(i, i)].modulus();
        if p == T::zero() {
            return Ok(lit(f64::NEG_INFINITY));
        }
        acc += p.ln();
    }
    Ok(acc)
}

type SvdParts<T> = (CMatrix<T>, Vec<T>, CMatrix<T>);

fn svd_residual<T: Real>(m: &CMatrix<T>, (u, s, vt): &SvdParts<T>) -> T {
    let mut us = u.clone();
    for (j, &x) in s.iter().enumerate() {
        us.column_mut(j).scale_mut(x);
    }
    frobenius(&(us * vt - m))
}

/// Thin SVD of a matrix with at least as many rows as columns.
///
/// nalgebra's complex SVD occasionally returns an inaccurate factorization
/// (seen on rank-deficient matrices with many zero rows), so the result is
/// checked against `m` and recomputed from `m^*`, then from the `R` factor
/// of a QR decomposition, keeping the first accurate one.
fn accurate_svd<T: Real>(m: &CMatrix<T>) -> SvdParts<T> {
    let n = m.nrows().max(m.ncols());
    let accept = lit::<T>(64.0 * n as f64) * T::default_epsilon() * (T::one() + frobenius(m));
    let direct = || {
        let svd = m.clone().svd(true, true);
        (
            svd.u.expect("requested U"),
            svd.singular_values.iter().copied().collect(),
            svd.v_t.expect("requested V^T"),
        )
    };
    let via_adjoint = || {
        let svd = m.adjoint().svd(true, true);
        (
            svd.v_t.expect("requested V^T").adjoint(),
            svd.singular_values.iter().copied().collect(),
            svd.u.expect("requested U").adjoint(),
        )
    };
    let via_qr = || {
        let (q, r) = m.clone().qr().unpack();
        let svd = r.svd(true, true);
        (
            q * svd.u.expect("requested U"),
            svd.singular_values.iter().copied().collect(),
            svd.v_t.expect("requested V^T"),
        )
    };
    let candidates: [&dyn Fn() -> SvdParts<T>; 3] = [&direct, &via_adjoint, &via_qr];
    let mut best: Option<(T, SvdParts<T>)> = None;
    for candidate in candidates {
        let parts = candidate();
        let residual = svd_residual(m, &parts);
        if residual <= accept {
            return parts;
        }
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, parts));
        }
    }
    best.expect("at least one candidate").1
}

/// Singular value decomposition with full right singular basis.
///
/// Wide matrices are padded with zero rows so that `v` always spans the whole
/// domain; singular values are sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd<T: Real> {
    rows: usize,
    /// Left singular vectors, `rows x min(rows', cols)`.
    pub u: CMatrix<T>,
    pub sigma: Vec<T>,
    /// Right singular vectors as columns, `cols x cols`.
    pub v: CMatrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn new(m: &CMatrix<T>) -> Self {
        let (rows, cols) = m.shape();
        if cols == 0 {
            return Self {
                rows,
                u: CMatrix::zeros(rows, 0),
                sigma: Vec::new(),
                v: CMatrix::zeros(0, 0),
            };
        }
        if rows == 0 {
            return Self {
                rows,
                u: CMatrix::zeros(0, 0),
                sigma: vec![T::zero(); cols],
                v: CMatrix::identity(cols, cols),
            };
        }
        let padded = if rows < cols {
            let mut p = CMatrix::zeros(cols, cols);
            p.view_mut((0, 0), (rows, cols)).copy_from(m);
            p
        } else {
            m.clone()
        };
        let (u_full, singular, vt) = accurate_svd(&padded);
        let mut order: Vec<usize> = (0..singular.len()).collect();
        order.sort_by(|&a, &b| {
            singular[b]
                .partial_cmp(&singular[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let sigma: Vec<T> = order.iter().map(|&i| singular[i]).collect();
        let u = CMatrix::from_fn(rows, order.len(), |i, j| u_full[(i, order[j])]);
        let v = CMatrix::from_fn(cols, order.len(), |i, j| vt[(order[j], i)].conj());
        Self { rows, u, sigma, v }
    }

    pub fn largest(&self) -> T {
        self.sigma.first().copied().unwrap_or_else(T::zero)
    }

    /// Rank under the relative cutoff `tol * sigma_max`, without any
    /// conditioning check.
    pub fn rank(&self, tol: T) -> usize {
        let cutoff = tol * self.largest();
        self.sigma.iter().filter(|&&s| s > cutoff).count()
    }

    /// Rank under the relative cutoff, rejecting decisions where singular
    /// values on both sides of the cutoff lie within a factor 10 of it.
    pub fn checked_rank(&self, tol: T, context: &'static str) -> Result<usize> {
        let smax = self.largest();
        if smax == T::zero() {
            return Ok(0);
        }
        let cutoff = tol * smax;
        let rank = self.rank(tol);
        let ten: T = lit(10.0);
        if rank > 0 && rank < self.sigma.len() {
            let above = self.sigma[rank - 1];
            let below = self.sigma[rank];
            if above < ten * cutoff && below > cutoff / ten {
                return Err(Error::IllConditionedRank {
                    context,
                    below: to_f64(below),
                    above: to_f64(above),
                    cutoff: to_f64(cutoff),
                });
            }
        }
        Ok(rank)
    }

    /// Orthonormal basis of the column space, given a rank.
    pub fn image(&self, rank: usize) -> CMatrix<T> {
        self.u.columns(0, rank).into_owned()
    }

    /// Orthonormal basis of the orthogonal complement of the kernel.
    pub fn coimage(&self, rank: usize) -> CMatrix<T> {
        self.v.columns(0, rank).into_owned()
    }

    /// Orthonormal basis of the kernel, given a rank.
    pub fn kernel(&self, rank: usize) -> CMatrix<T> {
        let n = self.v.ncols();
        self.v.columns(rank, n - rank).into_owned()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}

/// Orthonormal basis of the numerical kernel of `m`.
///
/// Singular values below `tol * sigma_max` count as zero. A zero matrix has
/// the whole domain as kernel.
pub fn kernel_basis<T: Real>(m: &CMatrix<T>, tol: T) -> Vec<CVector<T>> {
    let svd = Svd::new(m);
    let k = svd.kernel(svd.rank(tol));
    k.column_iter().map(|c| c.into_owned()).collect()
}

/// Kernel basis as the columns of a matrix.
pub fn kernel_matrix<T: Real>(m: &CMatrix<T>, tol: T) -> CMatrix<T> {
    let svd = Svd::new(m);
    svd.kernel(svd.rank(tol))
}

/// Stacks column vectors into a matrix with `dim` rows.
pub fn columns_to_matrix<T: Real>(dim: usize, vectors: &[CVector<T>]) -> CMatrix<T> {
    let mut m = CMatrix::zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Eigenvalues of a square complex matrix via the complex Schur form.
pub fn eigenvalues<T: Real>(m: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Inverse of a square complex matrix.
pub fn inverse<T: Real>(m: &CMatrix<T>) -> Option<CMatrix<T>> {
    if !m.is_square() {
        return None;
    }
    if m.nrows() == 0 {
        return Some(CMatrix::zeros(0, 0));
    }
    m.clone().try_inverse()
}

/// Hermitian positive-definite metric on `C^r`.
#[derive(Debug, Clone)]
pub struct GramMetric<T: Real> {
    matrix: CMatrix<T>,
    /// Lower Cholesky factor `L` with `G = L L^*`.
    chol: CMatrix<T>,
}

impl<T: Real> GramMetric<T> {
    /// Validates Hermitian symmetry (relative 1e-10) and positivity.
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NonSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if !all_finite(&matrix) {
            return Err(Error::NonFinite("gram metric"));
        }
        let scale = frobenius(&matrix).max(T::one());
        let deviation = frobenius(&(&matrix - matrix.adjoint()));
        if deviation > lit::<T>(1e-10) * scale {
            return Err(Error::NotHermitian {
                deviation: to_f64(deviation),
            });
        }
        if matrix.nrows() == 0 {
            return Ok(Self::identity(0));
        }
        let herm = (&matrix + matrix.adjoint()) * real(lit::<T>(0.5));
        let min = herm
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(lit::<T>(f64::INFINITY), |a, b| a.min(b));
        if min <= T::zero() {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: to_f64(min),
            });
        }
        let chol = Cholesky::<Complex<T>, Dyn>::new(herm.clone())
            .ok_or(Error::NotPositiveDefinite {
                min_eigenvalue: to_f64(min),
            })?
            .l();
        Ok(Self { matrix: herm, chol })
    }

    pub fn identity(r: usize) -> Self {
        Self {
            matrix: CMatrix::identity(r, r),
            chol: CMatrix::identity(r, r),
        }
    }

    /// Diagonal metric with the given positive weights.
    pub fn diagonal(weights: &[T]) -> Result<Self> {
        let n = weights.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                real(weights[i])
            } else {
                real(T::zero())
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// Lower Cholesky factor `L`, `G = L L^*`.
    pub fn cholesky_factor(&self) -> &CMatrix<T> {
        &self.chol
    }

    /// `log det G`.
    pub fn log_det(&self) -> T {
        let two: T = lit(2.0);
        (0..self.chol.nrows())
            .map(|i| self.chol[(i, i)].re.ln() * two)
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            matrix: &self.matrix * real(c),
            chol: &self.chol * real(c.sqrt()),
        }
    }

    /// Coordinates in which the metric becomes the standard one: `v -> L^* v`.
    pub fn whiten(&self, v: &CMatrix<T>) -> CMatrix<T> {
        self.chol.adjoint() * v
    }

    /// Inverse of [`whiten`](Self::whiten): `u -> L^{-*} u`.
    pub fn unwhiten(&self, u: &CMatrix<T>) -> CMatrix<T> {
        let lh = self.chol.adjoint();
        lh.solve_upper_triangular(u)
            .expect("Cholesky factor of a positive definite metric is invertible")
    }

    /// Gram matrix `V^* G V` of the columns of `v`.
    pub fn gram_of(&self, v: &CMatrix<T>) -> CMatrix<T> {
        v.adjoint() * &self.matrix * v
    }
}

/// Norm of `v_1 ^ ... ^ v_k` in the exterior power with the metric induced
/// by `g`: `sqrt(det <v_i, v_j>_g)`. Zero iff the vectors are dependent.
pub fn wedge_gram_norm<T: Real>(vectors: &[CVector<T>], g: &GramMetric<T>) -> Result<T> {
    for v in vectors {
        if v.len() != g.dim() {
            return Err(Error::DimensionMismatch {
                context: "wedge_gram_norm",
                expected: g.dim(),
                found: v.len(),
            });
        }
    }
    if vectors.len() > g.dim() {
        return Ok(T::zero());
    }
    let m = columns_to_matrix(g.dim(), vectors);
    Ok(log_wedge_norm_matrix(&m, g)?.exp())
}

/// `log` of [`wedge_gram_norm`] for the columns of `m`; avoids overflow when
/// many factors are accumulated.
pub fn log_wedge_norm_matrix<T: Real>(m: &CMatrix<T>, g: &GramMetric<T>) -> Result<T> {
    if m.nrows() != g.dim() {
        return Err(Error::DimensionMismatch {
            context: "wedge_gram_norm",
            expected: g.dim(),
            found: m.nrows(),
        });
    }
    if m.ncols() == 0 {
        return Ok(T::zero());
    }
    let w = g.whiten(m);
    // det(W^* W) = prod of squared singular values; |det R| from QR is stabler.
    let qr = w.qr();
    let r = qr.r();
    let mut acc = T::zero();
    for i in 0..r.nrows().min(r.ncols()) {
        let d = r[(i, i)].modulus();
        if d == T::zero() {
            return Ok(lit(f64::NEG_INFINITY));
        }
        acc += d.ln();
    }
    if r.nrows() < r.ncols() {
        return Ok(lit(f64::NEG_INFINITY));
    }
    Ok(acc)
}

/// Hermitian adjoint helper kept for symmetry with the real case.
pub fn adjoint<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.adjoint()
}

/// Real matrix view of the real parts (used for antisymmetric inputs).
pub fn real_part<T: Real>(m: &CMatrix<T>) -> DMatrix<T> {
    m.map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cmatrix_from_rows;
    use approx::assert_relative_eq;

    fn vec2(a: f64, b: f64) -> CVector<f64> {
        CVector::from_vec(vec![real(a), real(b)])
    }

    #[test]
    fn det_examples() {
        let id = CMatrix::<f64>::identity(3, 3);
        assert_relative_eq!(det(&id).unwrap().re, 1.0);
        let swap = cmatrix_from_rows::<f64>(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_relative_eq!(det(&swap).unwrap().re, -1.0);
        let m = cmatrix_from_rows::<f64>(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_relative_eq!(det(&m).unwrap().re, -2.0, epsilon = 1e-14);
        assert!(matches!(
            det(&CMatrix::<f64>::zeros(2, 3)),
            Err(Error::NonSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn det_of_triangular_is_diagonal_product() {
        let m = cmatrix_from_rows::<f64>(3, 3, &[2.0, 7.0, -1.0, 0.0, 3.0, 5.0, 0.0, 0.0, -4.0]);
        assert_relative_eq!(det(&m).unwrap().re, -24.0, epsilon = 1e-13);
        assert_relative_eq!(log_abs_det(&m).unwrap(), 24f64.ln(), epsilon = 1e-13);
    }

    #[test]
    fn kernel_examples() {
        let zero = CMatrix::<f64>::zeros(2, 2);
        assert_eq!(kernel_basis(&zero, 1e-9).len(), 2);
        assert!(kernel_basis(&CMatrix::<f64>::identity(2, 2), 1e-9).is_empty());
        let ones = cmatrix_from_rows::<f64>(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let k = kernel_basis(&ones, 1e-9);
        assert_eq!(k.len(), 1);
        let v = &k[0];
        // proportional to (1, -1)/sqrt 2 up to a phase
        assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-14);
        assert_relative_eq!((v[0] + v[1]).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let m = cmatrix_from_rows::<f64>(1, 3, &[1.0, 2.0, 3.0]);
        let k = kernel_basis(&m, 1e-9);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!((&m * v).norm() < 1e-12);
        }
    }

    #[test]
    fn checked_rank_detects_ambiguity() {
        let m = cmatrix_from_rows::<f64>(2, 2, &[1.0, 0.0, 0.0, 2e-9]);
        let svd = Svd::new(&m);
        // cutoff 1e-9, sigma 2e-9 above and nothing below: unambiguous
        assert_eq!(svd.checked_rank(1e-9, "t").unwrap(), 2);
        let m = cmatrix_from_rows::<f64>(3, 3, &[1.0, 0.0, 0.0, 0.0, 2e-9, 0.0, 0.0, 0.0, 5e-10]);
        assert!(matches!(
            Svd::new(&m).checked_rank(1e-9, "t"),
            Err(Error::IllConditionedRank { .. })
        ));
    }

    #[test]
    fn wedge_gram_norm_examples() {
        let g = GramMetric::<f64>::identity(2);
        let e = [vec2(1.0, 0.0), vec2(0.0, 1.0)];
        assert_relative_eq!(wedge_gram_norm(&e, &g).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(wedge_gram_norm(&[vec2(2.0, 0.0)], &g).unwrap(), 2.0, epsilon = 1e-14);
        let g = GramMetric::diagonal(&[1.0, 4.0]).unwrap();
        let v = [vec2(1.0, 0.0), vec2(1.0, 1.0)];
        assert_relative_eq!(wedge_gram_norm(&v, &g).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(wedge_gram_norm(&[vec2(1.0, 1.0), vec2(2.0, 2.0)], &g).unwrap(), 0.0);
        assert!(wedge_gram_norm(&[CVector::from_vec(vec![real(1.0)])], &g).is_err());
    }

    #[test]
    fn gram_metric_validation() {
        let m = cmatrix_from_rows::<f64>(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(GramMetric::new(m), Err(Error::NotHermitian { .. })));
        let m = cmatrix_from_rows::<f64>(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            GramMetric::new(m),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let g = GramMetric::<f64>::diagonal(&[4.0, 9.0]).unwrap();
        assert_relative_eq!(g.log_det(), 36f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn eigenvalues_of_rotation() {
        let m = cmatrix_from_rows::<f64>(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert_relative_eq!(ev[0].im, -1.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1].im, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn svd_reconstructs_rank_deficient_blocks() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            // zero rows on top and zero columns on the right, rank 3
            let a = crate::sampling::random_matrix::<f64, _>(3, 3, &mut rng);
            let b = crate::sampling::random_matrix::<f64, _>(3, 6, &mut rng);
            let mut m = CMatrix::zeros(9, 9);
            m.view_mut((6, 0), (3, 6)).copy_from(&(a * b));
            let svd = Svd::new(&m);
            let mut us = svd.u.clone();
            for (j, &x) in svd.sigma.iter().enumerate() {
                us.column_mut(j).scale_mut(x);
            }
            assert!(frobenius(&(us * svd.v.adjoint() - &m)) < 1e-12);
            assert_eq!(svd.rank(1e-9), 3);
        }
    }
}
