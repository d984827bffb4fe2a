//! Level filtrations, the long exact sequence of a pair and fusion of
//! determinant-line metrics along it.
//!
//! Levels are ordered so that the differential maps a basis vector of level
//! `q` into the span of basis vectors of level `>= q`. Cochains supported on
//! levels `> p` then form a subcomplex `S`, with quotient `Q` supported on
//! levels `<= p`, and
//!
//! ```text
//! ... -> H^i(S) -> H^i(T) -> H^i(Q) -> H^{i+1}(S) -> ...
//! ```
//!
//! is exact. Any interval of levels `[lo, hi]` is a subquotient complex.

use nalgebra::ComplexField;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{frobenius, lit, real, CMatrix, Real};

use super::cochain::{CochainComplex, GradedMetric};
use super::cohomology::{betti_numbers, cohomology};
use super::det_line::{canonical_element_log_norm, det_metric, DetGenerator, MetricedDetLine};

/// Relative size below which an entry of `d` is treated as absent when
/// validating a filtration.
pub const FILTRATION_TOL: f64 = 1e-12;

/// A cochain complex with a level in `0..n_levels` for every basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex<T: Real> {
    complex: CochainComplex<T>,
    levels: Vec<Vec<usize>>,
    n_levels: usize,
}

impl<T: Real> FilteredComplex<T> {
    pub fn new(complex: CochainComplex<T>, levels: Vec<Vec<usize>>, n_levels: usize) -> Result<Self> {
        if levels.len() != complex.len() {
            return Err(Error::DimensionMismatch {
                context: "level assignment degrees",
                expected: complex.len(),
                found: levels.len(),
            });
        }
        for (k, lv) in levels.iter().enumerate() {
            if lv.len() != complex.dim(k) {
                return Err(Error::DimensionMismatch {
                    context: "level assignment length",
                    expected: complex.dim(k),
                    found: lv.len(),
                });
            }
            if let Some(&bad) = lv.iter().find(|&&l| l >= n_levels) {
                return Err(Error::FiltrationNotRespected(format!(
                    "level {bad} in degree {k} is outside 0..{n_levels}"
                )));
            }
        }
        for k in 0..complex.len().saturating_sub(1) {
            let d = complex.d(k);
            let cutoff = frobenius(&d) * lit(FILTRATION_TOL);
            for j in 0..d.ncols() {
                for i in 0..d.nrows() {
                    if levels[k + 1][i] < levels[k][j] && d[(i, j)].modulus() > cutoff {
                        return Err(Error::FiltrationNotRespected(format!(
                            "d_{k} maps basis vector {j} (level {}) to level {}",
                            levels[k][j],
                            levels[k + 1][i]
                        )));
                    }
                }
            }
        }
        Ok(Self {
            complex,
            levels,
            n_levels,
        })
    }

    /// Every basis vector on level 0.
    pub fn trivial(complex: CochainComplex<T>) -> Self {
        let levels = complex.dims().iter().map(|&n| vec![0; n]).collect();
        Self {
            complex,
            levels,
            n_levels: 1,
        }
    }

    pub fn complex(&self) -> &CochainComplex<T> {
        &self.complex
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn level(&self, k: usize, j: usize) -> usize {
        self.levels[k][j]
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    fn indices(&self, k: usize, lo: usize, hi: usize) -> Vec<usize> {
        (0..self.complex.dim(k))
            .filter(|&j| (lo..=hi).contains(&self.levels[k][j]))
            .collect()
    }

    /// The complex supported on levels `lo..=hi`, with levels renumbered
    /// from 0.
    pub fn subquotient(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo > hi || hi >= self.n_levels {
            return Err(Error::FiltrationNotRespected(format!(
                "level interval [{lo}, {hi}] outside 0..{}",
                self.n_levels
            )));
        }
        let idx: Vec<Vec<usize>> = (0..self.complex.len())
            .map(|k| self.indices(k, lo, hi))
            .collect();
        let dims: Vec<usize> = idx.iter().map(Vec::len).collect();
        let diffs = (0..self.complex.len().saturating_sub(1))
            .map(|k| {
                let d = self.complex.d(k);
                CMatrix::from_fn(dims[k + 1], dims[k], |i, j| d[(idx[k + 1][i], idx[k][j])])
            })
            .collect();
        let complex = CochainComplex::with_tolerance(dims, diffs, lit(1e-9))?;
        let levels = idx
            .iter()
            .enumerate()
            .map(|(k, ix)| ix.iter().map(|&j| self.levels[k][j] - lo).collect())
            .collect();
        Ok(Self {
            complex,
            levels,
            n_levels: hi - lo + 1,
        })
    }

    /// Inclusion of the coordinates of levels `lo..=hi` into all coordinates,
    /// in degree `k`.
    pub fn selection(&self, k: usize, lo: usize, hi: usize) -> CMatrix<T> {
        let ix = self.indices(k, lo, hi);
        let mut e = CMatrix::zeros(self.complex.dim(k), ix.len());
        for (col, &row) in ix.iter().enumerate() {
            e[(row, col)] = real(T::one());
        }
        e
    }
}

/// The long exact sequence of the pair (levels `> p`, all levels),
/// materialized as an acyclic complex together with the bases it is written
/// in.
///
/// Position `3i` holds `H^i(S)`, `3i+1` holds `H^i(T)` and `3i+2` holds
/// `H^i(Q)`, each in coordinates of a standard-harmonic orthonormal basis.
#[derive(Debug, Clone)]
pub struct Les<T: Real> {
    pub complex: CochainComplex<T>,
    pub sub: CochainComplex<T>,
    pub total: CochainComplex<T>,
    pub quotient: CochainComplex<T>,
    pub sub_basis: DetGenerator<T>,
    pub total_basis: DetGenerator<T>,
    pub quotient_basis: DetGenerator<T>,
}

fn std_harmonic<T: Real>(c: &CochainComplex<T>, tol: T) -> Result<Vec<CMatrix<T>>> {
    Ok(cohomology(c, &GradedMetric::standard(c.dims()), tol)?.representatives)
}

/// Long exact sequence of the pair at level `p`: subcomplex on levels
/// `> p`, quotient on levels `<= p`.
pub fn les_of_pair<T: Real>(f: &FilteredComplex<T>, p: usize, tol: T) -> Result<Les<T>> {
    if p >= f.n_levels() {
        return Err(Error::FiltrationNotRespected(format!(
            "split level {p} outside 0..{}",
            f.n_levels()
        )));
    }
    let n = f.n_levels();
    let total = f.complex().clone();
    let quotient = f.subquotient(0, p)?.complex;
    let sub = if p + 1 < n {
        f.subquotient(p + 1, n - 1)?.complex
    } else {
        CochainComplex::zero_differentials(vec![0; total.len()])
    };
    let ps = std_harmonic(&sub, tol)?;
    let pt = std_harmonic(&total, tol)?;
    let pq = std_harmonic(&quotient, tol)?;

    let m = total.len();
    let mut dims = Vec::with_capacity(3 * m);
    for i in 0..m {
        dims.extend([ps[i].ncols(), pt[i].ncols(), pq[i].ncols()]);
    }
    let mut diffs = Vec::with_capacity(3 * m);
    for i in 0..m {
        let es = if p + 1 < n {
            f.selection(i, p + 1, n - 1)
        } else {
            CMatrix::zeros(total.dim(i), 0)
        };
        let eq = f.selection(i, 0, p);
        diffs.push(pt[i].adjoint() * &es * &ps[i]);
        diffs.push(pq[i].adjoint() * eq.transpose() * &pt[i]);
        if i + 1 < m {
            let es_next = if p + 1 < n {
                f.selection(i + 1, p + 1, n - 1)
            } else {
                CMatrix::zeros(total.dim(i + 1), 0)
            };
            diffs.push(ps[i + 1].adjoint() * es_next.transpose() * total.d(i) * &eq * &pq[i]);
        }
    }
    // The maps are built from orthonormal bases, selections and d_T, so
    // rounding in the compositions is measured against 1 + |d_T|.
    let scale = T::one() + (0..m).map(|i| frobenius(&total.d(i))).fold(T::zero(), |a, b| a.max(b));
    // Rank decisions are relative to each map's own size, so rounding noise
    // in maps that vanish exactly has to be removed first.
    let chop = tol * scale * lit(1e-3);
    for d in diffs.iter_mut() {
        d.apply(|z| {
            if z.modulus() <= chop {
                *z = real(T::zero());
            }
        });
    }
    for k in 0..diffs.len().saturating_sub(1) {
        let residual = frobenius(&(&diffs[k + 1] * &diffs[k]));
        if residual > tol * scale * scale {
            return Err(Error::FiltrationNotRespected(format!(
                "long exact sequence maps do not compose to zero at position {k} (residual {:e})",
                crate::scalar::to_f64(residual)
            )));
        }
    }
    let complex = CochainComplex::from_parts_unchecked(dims, diffs);
    let betti = betti_numbers(&complex, tol)?;
    if betti.iter().any(|&b| b != 0) {
        return Err(Error::FiltrationNotRespected(format!(
            "long exact sequence is not exact (Betti numbers {betti:?})"
        )));
    }
    Ok(Les {
        complex,
        sub,
        total,
        quotient,
        sub_basis: DetGenerator::new(ps),
        total_basis: DetGenerator::new(pt),
        quotient_basis: DetGenerator::new(pq),
    })
}

/// Metric on `det H(total)` from metrics on `det H(sub)` and
/// `det H(quotient)`: log-norms add, corrected by the torsion of the long
/// exact sequence.
pub fn fuse<T: Real>(
    sub_line: &MetricedDetLine<T>,
    quot_line: &MetricedDetLine<T>,
    les: &Les<T>,
    tol: T,
) -> Result<MetricedDetLine<T>> {
    let ls = sub_line.log_norm_of(&les.sub, &les.sub_basis, tol)?;
    let lq = quot_line.log_norm_of(&les.quotient, &les.quotient_basis, tol)?;
    let torsion = canonical_element_log_norm(
        &les.complex,
        &GradedMetric::standard(les.complex.dims()),
        tol,
    )?;
    Ok(MetricedDetLine {
        generator: les.total_basis.clone(),
        log_norm: ls + lq + torsion,
    })
}

/// A bracketing of the ordered levels `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FusionTree {
    Leaf(usize),
    Node(Box<FusionTree>, Box<FusionTree>),
}

impl FusionTree {
    /// `(((0, 1), 2), ...)`: fuse levels one at a time from the bottom.
    pub fn left_comb(n: usize) -> Self {
        assert!(n > 0, "fusion tree needs at least one level");
        (1..n).fold(FusionTree::Leaf(0), |acc, p| {
            FusionTree::Node(Box::new(acc), Box::new(FusionTree::Leaf(p)))
        })
    }

    /// Uniformly random split point at every node.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n > 0, "fusion tree needs at least one level");
        Self::random_range(0, n - 1, rng)
    }

    fn random_range<R: Rng + ?Sized>(lo: usize, hi: usize, rng: &mut R) -> Self {
        if lo == hi {
            return FusionTree::Leaf(lo);
        }
        let mid = rng.gen_range(lo..hi);
        FusionTree::Node(
            Box::new(Self::random_range(lo, mid, rng)),
            Box::new(Self::random_range(mid + 1, hi, rng)),
        )
    }

    /// Level interval covered, if the leaves are consecutive.
    pub fn span(&self) -> Option<(usize, usize)> {
        match self {
            FusionTree::Leaf(p) => Some((*p, *p)),
            FusionTree::Node(a, b) => {
                let (alo, ahi) = a.span()?;
                let (blo, bhi) = b.span()?;
                (ahi + 1 == blo).then_some((alo, bhi))
            }
        }
    }
}

fn fold_node<T: Real>(
    f: &FilteredComplex<T>,
    lines: &[MetricedDetLine<T>],
    tree: &FusionTree,
    tol: T,
) -> Result<(MetricedDetLine<T>, usize, usize)> {
    match tree {
        FusionTree::Leaf(p) => Ok((lines[*p].clone(), *p, *p)),
        FusionTree::Node(left, right) => {
            let (ql, lo, mid) = fold_node(f, lines, left, tol)?;
            let (sl, mid1, hi) = fold_node(f, lines, right, tol)?;
            debug_assert_eq!(mid + 1, mid1);
            let piece = f.subquotient(lo, hi)?;
            let les = les_of_pair(&piece, mid - lo, tol)?;
            Ok((fuse(&sl, &ql, &les, tol)?, lo, hi))
        }
    }
}

/// Folds per-level metrics into a metric on `det H` of the whole complex.
///
/// `lines[p]` is a metric on `det H` of the level-`p` piece,
/// `f.subquotient(p, p)`.
pub fn fold_lines<T: Real>(
    f: &FilteredComplex<T>,
    lines: &[MetricedDetLine<T>],
    tree: &FusionTree,
    tol: T,
) -> Result<MetricedDetLine<T>> {
    if lines.len() != f.n_levels() {
        return Err(Error::DimensionMismatch {
            context: "one line per level",
            expected: f.n_levels(),
            found: lines.len(),
        });
    }
    if tree.span() != Some((0, f.n_levels() - 1)) {
        return Err(Error::FiltrationNotRespected(
            "fusion tree does not cover the levels in order".into(),
        ));
    }
    Ok(fold_node(f, lines, tree, tol)?.0)
}

/// Per-level metrics induced by graded metrics on each level piece.
pub fn level_lines<T: Real>(
    f: &FilteredComplex<T>,
    metrics: &[GradedMetric<T>],
    tol: T,
) -> Result<Vec<MetricedDetLine<T>>> {
    if metrics.len() != f.n_levels() {
        return Err(Error::DimensionMismatch {
            context: "one graded metric per level",
            expected: f.n_levels(),
            found: metrics.len(),
        });
    }
    (0..f.n_levels())
        .map(|p| {
            let piece = f.subquotient(p, p)?.complex;
            let report = cohomology(&piece, &metrics[p], tol)?;
            det_metric(&piece, &metrics[p], &report, tol)
        })
        .collect()
}

/// Metric on `det H` of the whole complex assembled level by level.
pub fn fold_filtration<T: Real>(
    f: &FilteredComplex<T>,
    metrics: &[GradedMetric<T>],
    tol: T,
) -> Result<MetricedDetLine<T>> {
    let lines = level_lines(f, metrics, tol)?;
    fold_lines(f, &lines, &FusionTree::left_comb(f.n_levels()), tol)
}

/// Largest change of the folded log-norm over `trials` random association
/// orders, all measured on the generator of the bottom-up fold.
pub fn fusion_order_invariance_check<T: Real, R: Rng + ?Sized>(
    f: &FilteredComplex<T>,
    lines: &[MetricedDetLine<T>],
    trials: usize,
    rng: &mut R,
    tol: T,
) -> Result<T> {
    let reference = fold_lines(f, lines, &FusionTree::left_comb(f.n_levels()), tol)?;
    let mut worst = T::zero();
    for _ in 0..trials {
        let tree = FusionTree::random(f.n_levels(), rng);
        let line = fold_lines(f, lines, &tree, tol)?;
        let l = line.log_norm_of(f.complex(), &reference.generator, tol)?;
        worst = worst.max((l - reference.log_norm).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GramMetric;
    use crate::complex::det_line::canonical_element_norm;
    use crate::scalar::cmatrix_from_rows;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-9;

    fn two_cell(c: f64) -> FilteredComplex<f64> {
        let complex = CochainComplex::two_term(0, cmatrix_from_rows(1, 1, &[c])).unwrap();
        FilteredComplex::new(complex, vec![vec![0], vec![1]], 2).unwrap()
    }

    #[test]
    fn rejects_level_decreasing_differential() {
        let complex = CochainComplex::two_term(0, cmatrix_from_rows::<f64>(1, 1, &[1.0])).unwrap();
        assert!(matches!(
            FilteredComplex::new(complex, vec![vec![1], vec![0]], 2),
            Err(Error::FiltrationNotRespected(_))
        ));
    }

    #[test]
    fn two_level_les_has_connecting_isomorphism() {
        let les = les_of_pair(&two_cell(1.0), 0, TOL).unwrap();
        // H^0(Q) = C at position 2 maps isomorphically to H^1(S) at position 3
        assert_eq!(les.complex.dims(), &[0, 0, 1, 1, 0, 0]);
        assert_relative_eq!(les.complex.d(2)[(0, 0)].norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn split_filtration_has_zero_connecting_maps() {
        let complex = CochainComplex::<f64>::zero_differentials(vec![1, 1]);
        let f = FilteredComplex::new(complex, vec![vec![0], vec![1]], 2).unwrap();
        let les = les_of_pair(&f, 0, TOL).unwrap();
        assert_eq!(frobenius(&les.complex.d(2)), 0.0);
        let lines = level_lines(&f, &[GradedMetric::standard(&[1, 0]), GradedMetric::standard(&[0, 1])], TOL)
            .unwrap();
        let total = fold_lines(&f, &lines, &FusionTree::left_comb(2), TOL).unwrap();
        assert_relative_eq!(total.log_norm, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn acyclic_sub_gives_isomorphism_and_adds_torsion() {
        // level 0: C with zero differential (H^0 = C); level 1: C --3--> C
        let d = cmatrix_from_rows::<f64>(1, 2, &[0.0, 3.0]);
        let complex = CochainComplex::two_term(0, d).unwrap();
        let f = FilteredComplex::new(complex, vec![vec![0, 1], vec![1]], 2).unwrap();
        let metrics = [GradedMetric::standard(&[1, 0]), GradedMetric::standard(&[1, 1])];
        let total = fold_filtration(&f, &metrics, TOL).unwrap();
        let std = GradedMetric::standard(f.complex().dims());
        let direct = det_metric(f.complex(), &std, &cohomology(f.complex(), &std, TOL).unwrap(), TOL).unwrap();
        let l = total.log_norm_of(f.complex(), &direct.generator, TOL).unwrap();
        assert_relative_eq!(l, direct.log_norm, epsilon = 1e-12);
        assert_relative_eq!(l, -(3f64.ln()), epsilon = 1e-12);
    }

    #[test]
    fn circle_reassembled_from_two_cells() {
        for c in [-0.5, 2.0, 0.25] {
            let f = two_cell(c);
            let metrics = [GradedMetric::standard(&[1, 0]), GradedMetric::standard(&[0, 1])];
            let line = fold_filtration(&f, &metrics, TOL).unwrap();
            let std = GradedMetric::standard(f.complex().dims());
            let expected = canonical_element_norm(f.complex(), &std, TOL).unwrap().ln();
            let l = line
                .log_norm_of(f.complex(), &DetGenerator::unit(f.complex().dims()), TOL)
                .unwrap();
            assert_relative_eq!(l, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn morse_filtration_reproduces_det_metric() {
        // d = [[1, 2], [0, 1]] style complex, one basis vector per level
        let d0 = cmatrix_from_rows::<f64>(2, 1, &[1.0, 2.0]);
        let complex = CochainComplex::two_term(0, d0).unwrap();
        let f = FilteredComplex::new(complex, vec![vec![0], vec![1, 2]], 3).unwrap();
        let metrics = [
            GradedMetric::standard(&[1, 0]),
            GradedMetric::standard(&[0, 1]),
            GradedMetric::standard(&[0, 1]),
        ];
        let folded = fold_filtration(&f, &metrics, TOL).unwrap();
        let std = GradedMetric::standard(f.complex().dims());
        let direct = det_metric(f.complex(), &std, &cohomology(f.complex(), &std, TOL).unwrap(), TOL).unwrap();
        let l = folded.log_norm_of(f.complex(), &direct.generator, TOL).unwrap();
        assert_relative_eq!(l, direct.log_norm, epsilon = 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lines = level_lines(&f, &metrics, TOL).unwrap();
        assert!(fusion_order_invariance_check(&f, &lines, 10, &mut rng, TOL).unwrap() < 1e-12);
    }

    #[test]
    fn single_level_fold_is_det_metric() {
        let complex = CochainComplex::two_term(0, cmatrix_from_rows::<f64>(1, 2, &[1.0, 1.0])).unwrap();
        let g = GradedMetric::new(vec![
            GramMetric::diagonal(&[2.0, 1.0]).unwrap(),
            GramMetric::diagonal(&[3.0]).unwrap(),
        ]);
        let f = FilteredComplex::trivial(complex.clone());
        let folded = fold_filtration(&f, std::slice::from_ref(&g), TOL).unwrap();
        let direct = det_metric(&complex, &g, &cohomology(&complex, &g, TOL).unwrap(), TOL).unwrap();
        assert_relative_eq!(folded.log_norm, direct.log_norm, epsilon = 1e-14);
    }

    #[test]
    fn fusion_trees_cover_levels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..7 {
            assert_eq!(FusionTree::left_comb(n).span(), Some((0, n - 1)));
            assert_eq!(FusionTree::random(n, &mut rng).span(), Some((0, n - 1)));
        }
    }
}
