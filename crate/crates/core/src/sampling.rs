//! Random instances for property tests, the self-check suites and the
//! acceptance run. All generators are deterministic given the RNG state.

use nalgebra::{Complex, ComplexField};
use rand::Rng;

use crate::algebra::{kernel_basis, GramMetric};
use crate::complex::{CochainComplex, FilteredComplex, GradedMetric};
use crate::flow::{
    ClosedOrbitDatum, CriticalElement, FixedPointDatum, MorseSmaleSystem, Orientation, Sign, SurgeryDatum,
    SurgeryMap,
};
use crate::scalar::{cplx, lit, real, CMatrix, Real};

/// Complex number with real and imaginary parts uniform in `[-1, 1]`.
pub fn random_scalar<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    cplx(lit(rng.gen_range(-1.0..=1.0)), lit(rng.gen_range(-1.0..=1.0)))
}

pub fn random_matrix<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix<T> {
    CMatrix::from_fn(rows, cols, |_, _| random_scalar(rng))
}

/// Haar-like unitary from the QR factorization of a Gaussian-ish matrix.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix<T> {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let qr = random_matrix::<T, R>(n, n, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let m = d.modulus();
        if m > T::zero() {
            let phase = d / real(m);
            let col = q.column(j) * phase;
            q.set_column(j, &col);
        }
    }
    q
}

/// `U diag(s) V` with unitary `U`, `V` and singular values in `[lo, hi]`.
pub fn random_conditioned<T: Real, R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> CMatrix<T> {
    let u = random_unitary::<T, R>(n, rng);
    let v = random_unitary::<T, R>(n, rng);
    let s = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            real(lit(rng.gen_range(lo..=hi)))
        } else {
            real(T::zero())
        }
    });
    u * s * v
}

/// Matrix with prescribed eigenvalues, conjugated by a well-conditioned
/// random matrix.
pub fn random_with_spectrum<T: Real, R: Rng + ?Sized>(eigs: &[Complex<T>], rng: &mut R) -> CMatrix<T> {
    let n = eigs.len();
    let p = random_conditioned::<T, R>(n, 0.5, 2.0, rng);
    let p_inv = p.clone().try_inverse().expect("well-conditioned matrix is invertible");
    let mut upper = CMatrix::<T>::zeros(n, n);
    for i in 0..n {
        upper[(i, i)] = eigs[i];
        for j in i + 1..n {
            upper[(i, j)] = random_scalar::<T, R>(rng) * real(lit(0.5));
        }
    }
    p * upper * p_inv
}

/// Hermitian positive-definite Gram matrix with eigenvalues in `[0.25, 4]`.
pub fn random_gram<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> GramMetric<T> {
    let u = random_unitary::<T, R>(n, rng);
    let d = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            real(lit(rng.gen_range(0.25..=4.0)))
        } else {
            real(T::zero())
        }
    });
    let m = &u * d * u.adjoint();
    let m = (&m + m.adjoint()) * real(lit(0.5));
    GramMetric::new(m).expect("random Gram matrix is positive definite")
}

pub fn random_graded_metric<T: Real, R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> GradedMetric<T> {
    GradedMetric::new(dims.iter().map(|&n| random_gram(n, rng)).collect())
}

/// Random acyclic complex with `degrees` degrees: in normal form `C^k =
/// C^{r_{k-1}} ⊕ C^{r_k}` with the second summand mapped isomorphically
/// onto the first summand of `C^{k+1}`, then conjugated degreewise by
/// well-conditioned changes of basis.
pub fn random_acyclic_complex<T: Real, R: Rng + ?Sized>(
    degrees: usize,
    max_rank: usize,
    rng: &mut R,
) -> CochainComplex<T> {
    let mut ranks: Vec<usize> = (0..degrees).map(|_| rng.gen_range(0..=max_rank)).collect();
    if let Some(last) = ranks.last_mut() {
        *last = 0;
    }
    let dims: Vec<usize> = (0..degrees)
        .map(|k| ranks[k] + if k == 0 { 0 } else { ranks[k - 1] })
        .collect();
    let bases: Vec<CMatrix<T>> = dims
        .iter()
        .map(|&n| random_conditioned(n, 0.5, 2.0, rng))
        .collect();
    let diffs = (0..degrees.saturating_sub(1))
        .map(|k| {
            let mut normal = CMatrix::<T>::zeros(dims[k + 1], dims[k]);
            let offset = if k == 0 { 0 } else { ranks[k - 1] };
            let iso = random_conditioned::<T, R>(ranks[k], 0.5, 2.0, rng);
            normal
                .view_mut((0, offset), (ranks[k], ranks[k]))
                .copy_from(&iso);
            let inv = bases[k].clone().try_inverse().expect("invertible basis change");
            &bases[k + 1] * normal * inv
        })
        .collect();
    CochainComplex::with_tolerance(dims, diffs, lit(1e-10)).expect("conjugated normal form is a complex")
}

/// Random filtered complex with `n_levels` levels, `degrees` degrees and at
/// most `max_dim` basis vectors per degree.
///
/// A level-respecting `D` with `D^2 = 0` pairs some basis vectors `u -> c w`
/// with `level(w) >= level(u)`; the differential is `P D P^{-1}` for a
/// random block-triangular `P` that also respects levels.
pub fn random_filtered_complex<T: Real, R: Rng + ?Sized>(
    n_levels: usize,
    degrees: usize,
    max_dim: usize,
    rng: &mut R,
) -> FilteredComplex<T> {
    let dims: Vec<usize> = (0..degrees).map(|_| rng.gen_range(1..=max_dim)).collect();
    let levels: Vec<Vec<usize>> = dims
        .iter()
        .map(|&n| {
            let mut lv: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n_levels)).collect();
            lv.sort_unstable();
            lv
        })
        .collect();
    // used[k][j]: basis vector already a source or a target
    let mut used: Vec<Vec<bool>> = dims.iter().map(|&n| vec![false; n]).collect();
    let mut normal: Vec<CMatrix<T>> = (0..degrees.saturating_sub(1))
        .map(|k| CMatrix::zeros(dims[k + 1], dims[k]))
        .collect();
    for k in 0..degrees.saturating_sub(1) {
        for j in 0..dims[k] {
            if used[k][j] || rng.gen_bool(0.25) {
                continue;
            }
            let targets: Vec<usize> = (0..dims[k + 1])
                .filter(|&i| !used[k + 1][i] && levels[k + 1][i] >= levels[k][j])
                .collect();
            if targets.is_empty() {
                continue;
            }
            let i = targets[rng.gen_range(0..targets.len())];
            let modulus: f64 = rng.gen_range(0.5..=2.0);
            let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            normal[k][(i, j)] = cplx(lit(modulus * angle.cos()), lit(modulus * angle.sin()));
            used[k][j] = true;
            used[k + 1][i] = true;
        }
    }
    let bases: Vec<CMatrix<T>> = (0..degrees)
        .map(|k| level_respecting_basis(&levels[k], rng))
        .collect();
    let diffs = normal
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let inv = bases[k].clone().try_inverse().expect("invertible basis change");
            &bases[k + 1] * d * inv
        })
        .collect();
    let complex = CochainComplex::with_tolerance(dims, diffs, lit(1e-10))
        .expect("conjugated normal form is a complex");
    FilteredComplex::new(complex, levels, n_levels).expect("construction respects levels")
}

/// Invertible `P` with `P[i][j] = 0` whenever `level(i) < level(j)`, with
/// well-conditioned same-level blocks. `levels` must be sorted.
fn level_respecting_basis<T: Real, R: Rng + ?Sized>(levels: &[usize], rng: &mut R) -> CMatrix<T> {
    let n = levels.len();
    let mut p = CMatrix::<T>::zeros(n, n);
    let mut start = 0;
    while start < n {
        let end = start + levels[start..].iter().take_while(|&&l| l == levels[start]).count();
        let block = random_conditioned::<T, R>(end - start, 0.5, 2.0, rng);
        p.view_mut((start, start), (end - start, end - start))
            .copy_from(&block);
        start = end;
    }
    for i in 0..n {
        for j in 0..n {
            if levels[i] > levels[j] {
                p[(i, j)] = random_scalar::<T, R>(rng) * real(lit(0.5));
            }
        }
    }
    p
}

pub fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> Sign {
    if rng.gen_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Eigenvalue with modulus in `[0.3, 3]` and distance at least `gap` from 1.
pub fn random_eigenvalue_avoiding_one<T: Real, R: Rng + ?Sized>(gap: f64, rng: &mut R) -> Complex<T> {
    loop {
        let modulus: f64 = rng.gen_range(0.3..=3.0);
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (re, im) = (modulus * angle.cos(), modulus * angle.sin());
        if ((re - 1.0).powi(2) + im * im).sqrt() >= gap {
            return cplx(lit(re), lit(im));
        }
    }
}

/// Closed orbit whose twisted holonomy has no eigenvalue within `gap` of 1
/// (when `gap > 0`); with `gap == 0` the holonomy is an arbitrary
/// well-conditioned matrix.
pub fn random_orbit<T: Real, R: Rng + ?Sized>(
    id: &str,
    rank: usize,
    max_index: usize,
    gap: f64,
    rng: &mut R,
) -> ClosedOrbitDatum<T> {
    let twist = random_sign(rng);
    let orientation = if rng.gen_bool(0.5) {
        Orientation::Positive
    } else {
        Orientation::Negative
    };
    let twisted = if gap > 0.0 {
        let eigs: Vec<Complex<T>> = (0..rank)
            .map(|_| random_eigenvalue_avoiding_one(gap, rng))
            .collect();
        random_with_spectrum(&eigs, rng)
    } else {
        random_conditioned(rank, 0.5, 2.0, rng)
    };
    // twisted = twist * oriented holonomy
    let oriented = twisted * real(twist.value::<T>());
    let holonomy = match orientation {
        Orientation::Positive => oriented,
        Orientation::Negative => oriented.try_inverse().expect("well-conditioned holonomy"),
    };
    let period = lit(rng.gen_range(0.5..=3.0));
    ClosedOrbitDatum::new(id, rng.gen_range(0..=max_index), period, twist, holonomy, orientation)
        .expect("random orbit is valid")
}

pub fn random_fixed_point<T: Real, R: Rng + ?Sized>(
    id: &str,
    rank: usize,
    max_index: usize,
    rng: &mut R,
) -> FixedPointDatum<T> {
    FixedPointDatum::new(id, rng.gen_range(0..=max_index), random_gram(rank, rng))
}

/// Level-respecting cross block `X: C_A -> C_B[1]` with
/// `X d_A + d_B X = 0`, so that `[[d_A, 0], [X, d_B]]` is a differential.
/// A random element of the solution space, scaled to unit norm.
fn random_cross_block<T: Real, R: Rng + ?Sized>(
    a: &CochainComplex<T>,
    b: &CochainComplex<T>,
    rng: &mut R,
) -> Vec<CMatrix<T>> {
    let degrees = a.len();
    // unknown X_k: dim_b(k+1) x dim_a(k), k = 0..degrees-1
    let shapes: Vec<(usize, usize)> = (0..degrees.saturating_sub(1))
        .map(|k| (b.dim(k + 1), a.dim(k)))
        .collect();
    let offsets: Vec<usize> = shapes
        .iter()
        .scan(0, |acc, &(r, c)| {
            let o = *acc;
            *acc += r * c;
            Some(o)
        })
        .collect();
    let unknowns: usize = shapes.iter().map(|&(r, c)| r * c).sum();
    if unknowns == 0 {
        return shapes.iter().map(|&(r, c)| CMatrix::zeros(r, c)).collect();
    }
    let unpack = |v: &[Complex<T>]| -> Vec<CMatrix<T>> {
        shapes
            .iter()
            .zip(&offsets)
            .map(|(&(r, c), &o)| CMatrix::from_column_slice(r, c, &v[o..o + r * c]))
            .collect()
    };
    let constraint = |x: &[CMatrix<T>]| -> Vec<Complex<T>> {
        let mut out = Vec::new();
        for k in 0..degrees.saturating_sub(2) {
            let m = &x[k + 1] * a.d(k) + b.d(k + 1) * &x[k];
            out.extend(m.iter().copied());
        }
        out
    };
    let mut columns = Vec::with_capacity(unknowns);
    for u in 0..unknowns {
        let mut v = vec![real(T::zero()); unknowns];
        v[u] = real(T::one());
        columns.push(constraint(&unpack(&v)));
    }
    let rows = columns.first().map_or(0, Vec::len);
    let system = CMatrix::from_fn(rows, unknowns, |i, j| columns[j][i]);
    let basis = if rows == 0 {
        (0..unknowns)
            .map(|u| {
                let mut v = nalgebra::DVector::zeros(unknowns);
                v[u] = real(T::one());
                v
            })
            .collect()
    } else {
        kernel_basis(&system, lit(1e-9))
    };
    let mut x = nalgebra::DVector::<Complex<T>>::zeros(unknowns);
    for v in &basis {
        x += v * random_scalar::<T, R>(rng);
    }
    let norm = x.norm();
    if norm > T::zero() {
        x /= real(norm);
    }
    unpack(x.as_slice())
}

/// Chain model of `elements` in the given order, with random connecting
/// blocks from every level into all later ones.
pub fn random_chain_model<T: Real, R: Rng + ?Sized>(
    elements: &[CriticalElement<T>],
    degrees: usize,
    rng: &mut R,
) -> FilteredComplex<T> {
    let mut total = CochainComplex::zero_differentials(vec![0; degrees]);
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); degrees];
    for (p, e) in elements.iter().enumerate() {
        let piece = e.piece(degrees);
        let x = random_cross_block(&total, &piece, rng);
        let dims: Vec<usize> = (0..degrees).map(|k| total.dim(k) + piece.dim(k)).collect();
        let diffs = (0..degrees.saturating_sub(1))
            .map(|k| {
                let mut d = CMatrix::zeros(dims[k + 1], dims[k]);
                let (a0, a1) = (total.dim(k), total.dim(k + 1));
                d.view_mut((0, 0), (a1, a0)).copy_from(&total.d(k));
                d.view_mut((a1, 0), (piece.dim(k + 1), a0)).copy_from(&x[k]);
                d.view_mut((a1, a0), (piece.dim(k + 1), piece.dim(k)))
                    .copy_from(&piece.d(k));
                d
            })
            .collect();
        total = CochainComplex::with_tolerance(dims, diffs, lit(1e-9)).expect("cross block solves the constraint");
        for (k, lv) in levels.iter_mut().enumerate() {
            lv.extend(std::iter::repeat_n(p, piece.dim(k)));
        }
    }
    FilteredComplex::new(total, levels, elements.len().max(1)).expect("model respects levels")
}

/// Options for [`random_system`].
#[derive(Debug, Clone, Copy)]
pub struct SystemShape {
    pub max_orbits: usize,
    pub max_fixed: usize,
    pub max_rank: usize,
    pub max_index: usize,
    /// Minimum distance of twisted-holonomy eigenvalues from 1; 0 for none.
    pub gap: f64,
    /// Build a chain model with random connecting blocks.
    pub chain_model: bool,
}

/// Random system with at least one element, in random filtration order.
pub fn random_system<T: Real, R: Rng + ?Sized>(shape: SystemShape, rng: &mut R) -> MorseSmaleSystem<T> {
    let rank = rng.gen_range(1..=shape.max_rank);
    let (n_orbits, n_fixed) = loop {
        let o = rng.gen_range(0..=shape.max_orbits);
        let f = rng.gen_range(0..=shape.max_fixed);
        if o + f > 0 {
            break (o, f);
        }
    };
    let mut elements: Vec<CriticalElement<T>> = Vec::new();
    for i in 0..n_orbits {
        let o = random_orbit(&format!("orbit{i}"), rank, shape.max_index, shape.gap, rng);
        elements.push(CriticalElement::Orbit(o));
    }
    for i in 0..n_fixed {
        let x = random_fixed_point(&format!("fixed{i}"), rank, shape.max_index + 1, rng);
        elements.push(CriticalElement::Fixed(x));
    }
    // Fisher-Yates with the supplied RNG keeps the order reproducible
    for i in (1..elements.len()).rev() {
        let j = rng.gen_range(0..=i);
        elements.swap(i, j);
    }
    let degrees = shape.max_index + 2;
    if shape.chain_model {
        let model = random_chain_model(&elements, degrees, rng);
        MorseSmaleSystem::new(rank, elements, Some(model), false).expect("random system is valid")
    } else {
        MorseSmaleSystem::new(rank, elements, None, true).expect("random system is valid")
    }
}

/// Surgery data for every orbit of `sys`, satisfying the sign constraint.
pub fn random_surgery<T: Real, R: Rng + ?Sized>(sys: &MorseSmaleSystem<T>, rng: &mut R) -> SurgeryMap<T> {
    sys.orbits()
        .map(|o| {
            let n_a_prime = random_sign(rng);
            let n_a = -(o.twist * n_a_prime);
            let datum = SurgeryDatum {
                tau: random_conditioned(o.rank(), 0.5, 2.0, rng),
                n_a,
                n_a_prime,
                gram_x: random_gram(o.rank(), rng),
                gram_x_prime: random_gram(o.rank(), rng),
            };
            (o.id.clone(), datum)
        })
        .collect()
}
