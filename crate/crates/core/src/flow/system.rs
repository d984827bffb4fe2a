//! Morse-Smale flow data: fixed points, closed orbits and their ordering
//! along a Smale filtration, optionally with a chain-level model.

use std::collections::BTreeSet;

use crate::algebra::{GramMetric, Svd};
use crate::complex::{betti_numbers, CochainComplex, FilteredComplex};
use crate::error::{Error, Result};
use crate::scalar::{all_finite, frobenius, lit, real, to_f64, CMatrix, Real};

/// Default relative tolerance for matching chain-model blocks.
pub const MODEL_TOL: f64 = 1e-9;

/// Smallest accepted ratio of extreme singular values of a holonomy or
/// transport matrix.
pub const INVERTIBILITY_TOL: f64 = 1e-12;

/// A sign `±1`, used for twists and intersection signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_i64(v: i64) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn value<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self * Sign::Minus
    }
}

/// Orientation of a closed orbit relative to the flow direction. The
/// holonomy is always given along the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Traversed along the flow.
    Positive,
    /// Traversed against the flow.
    Negative,
}

/// `(-1)^k` as a real.
pub fn parity<T: Real>(k: usize) -> T {
    if k % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

pub(crate) fn check_invertible<T: Real>(m: &CMatrix<T>) -> bool {
    if !m.is_square() || !all_finite(m) {
        return false;
    }
    if m.nrows() == 0 {
        return true;
    }
    let svd = Svd::new(m);
    let smallest = svd.sigma.iter().copied().fold(svd.largest(), |a, b| a.min(b));
    smallest > svd.largest() * lit(INVERTIBILITY_TOL)
}

/// A hyperbolic fixed point with the fiber metric of the flat bundle there.
#[derive(Debug, Clone)]
pub struct FixedPointDatum<T: Real> {
    pub id: String,
    /// Dimension of the unstable manifold.
    pub index: usize,
    pub gram: GramMetric<T>,
}

impl<T: Real> FixedPointDatum<T> {
    pub fn new(id: impl Into<String>, index: usize, gram: GramMetric<T>) -> Self {
        Self {
            id: id.into(),
            index,
            gram,
        }
    }

    pub fn rank(&self) -> usize {
        self.gram.dim()
    }
}

/// A hyperbolic closed orbit.
#[derive(Debug, Clone)]
pub struct ClosedOrbitDatum<T: Real> {
    pub id: String,
    /// Dimension of the unstable bundle.
    pub index: usize,
    pub period: T,
    /// `+1` when the unstable bundle is orientable along the orbit.
    pub twist: Sign,
    /// Holonomy of the flat bundle once around the orbit, along the flow.
    pub holonomy: CMatrix<T>,
    pub orientation: Orientation,
}

impl<T: Real> ClosedOrbitDatum<T> {
    pub fn new(
        id: impl Into<String>,
        index: usize,
        period: T,
        twist: Sign,
        holonomy: CMatrix<T>,
        orientation: Orientation,
    ) -> Result<Self> {
        let id = id.into();
        if !(period.is_finite() && period > T::zero()) {
            return Err(Error::InvalidDatum {
                id,
                reason: format!("period {} is not positive", to_f64(period)),
            });
        }
        if !holonomy.is_square() {
            return Err(Error::InvalidDatum {
                id,
                reason: format!("holonomy is {}x{}", holonomy.nrows(), holonomy.ncols()),
            });
        }
        if !check_invertible(&holonomy) {
            return Err(Error::SingularHolonomy(id));
        }
        Ok(Self {
            id,
            index,
            period,
            twist,
            holonomy,
            orientation,
        })
    }

    pub fn rank(&self) -> usize {
        self.holonomy.nrows()
    }

    /// Holonomy along the declared orientation.
    pub fn oriented_holonomy(&self) -> CMatrix<T> {
        match self.orientation {
            Orientation::Positive => self.holonomy.clone(),
            Orientation::Negative => self
                .holonomy
                .clone()
                .try_inverse()
                .expect("holonomy validated invertible"),
        }
    }

    /// Holonomy of `o(E^u) ⊗ F` along the declared orientation:
    /// `twist * oriented_holonomy`.
    pub fn twisted_holonomy(&self) -> CMatrix<T> {
        self.oriented_holonomy() * real(self.twist.value::<T>())
    }

    /// Same orbit with the opposite orientation.
    pub fn reversed(&self) -> Self {
        let mut o = self.clone();
        o.orientation = match self.orientation {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        };
        o
    }
}

#[derive(Debug, Clone)]
pub enum CriticalElement<T: Real> {
    Fixed(FixedPointDatum<T>),
    Orbit(ClosedOrbitDatum<T>),
}

impl<T: Real> CriticalElement<T> {
    pub fn id(&self) -> &str {
        match self {
            CriticalElement::Fixed(x) => &x.id,
            CriticalElement::Orbit(o) => &o.id,
        }
    }

    pub fn index(&self) -> usize {
        match self {
            CriticalElement::Fixed(x) => x.index,
            CriticalElement::Orbit(o) => o.index,
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            CriticalElement::Fixed(x) => x.rank(),
            CriticalElement::Orbit(o) => o.rank(),
        }
    }

    /// Highest degree carrying cochains of this element.
    pub fn top_degree(&self) -> usize {
        match self {
            CriticalElement::Fixed(x) => x.index,
            CriticalElement::Orbit(o) => o.index + 1,
        }
    }

    /// Cochain model of this element's filtration step in `degrees`
    /// degrees: `F_x` in degree `ind(x)`, or `C^r --(Ã^{-1} - 1)--> C^r` in
    /// degrees `ind, ind + 1`.
    pub fn piece(&self, degrees: usize) -> CochainComplex<T> {
        let mut dims = vec![0; degrees];
        let r = self.rank();
        match self {
            CriticalElement::Fixed(x) => {
                dims[x.index] = r;
                CochainComplex::zero_differentials(dims)
            }
            CriticalElement::Orbit(o) => {
                dims[o.index] = r;
                dims[o.index + 1] = r;
                let mut diffs: Vec<CMatrix<T>> = dims
                    .windows(2)
                    .map(|w| CMatrix::zeros(w[1], w[0]))
                    .collect();
                diffs[o.index] = orbit_differential(o);
                CochainComplex::new(dims, diffs).expect("two-term complex")
            }
        }
    }
}

/// `Ã^{-1} - 1` for the twisted holonomy `Ã`.
pub fn orbit_differential<T: Real>(o: &ClosedOrbitDatum<T>) -> CMatrix<T> {
    let a = o.twisted_holonomy();
    let n = a.nrows();
    a.try_inverse().expect("holonomy validated invertible") - CMatrix::identity(n, n)
}

/// Critical elements in Smale-filtration order, one per level.
#[derive(Debug, Clone)]
pub struct MorseSmaleSystem<T: Real> {
    rank: usize,
    elements: Vec<CriticalElement<T>>,
    chain_model: Option<FilteredComplex<T>>,
    split: bool,
    manifold_dim: Option<usize>,
}

impl<T: Real> MorseSmaleSystem<T> {
    /// Validates ranks, unique ids, declared dimension and, when present,
    /// that level `p` of the chain model is exactly the model of element
    /// `p`.
    pub fn new(
        rank: usize,
        elements: Vec<CriticalElement<T>>,
        chain_model: Option<FilteredComplex<T>>,
        split: bool,
    ) -> Result<Self> {
        Self::with_dimension(rank, elements, chain_model, split, None)
    }

    pub fn with_dimension(
        rank: usize,
        elements: Vec<CriticalElement<T>>,
        chain_model: Option<FilteredComplex<T>>,
        split: bool,
        manifold_dim: Option<usize>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for e in &elements {
            if !seen.insert(e.id().to_string()) {
                return Err(Error::InvalidDatum {
                    id: e.id().into(),
                    reason: "duplicate id".into(),
                });
            }
            if e.rank() != rank {
                return Err(Error::InvalidDatum {
                    id: e.id().into(),
                    reason: format!("rank {} differs from system rank {rank}", e.rank()),
                });
            }
            if let Some(m) = manifold_dim {
                let bound = match e {
                    CriticalElement::Fixed(_) => m,
                    CriticalElement::Orbit(_) => m.saturating_sub(1),
                };
                if e.index() > bound {
                    return Err(Error::InvalidDatum {
                        id: e.id().into(),
                        reason: format!("index {} exceeds {bound} in dimension {m}", e.index()),
                    });
                }
            }
        }
        let sys = Self {
            rank,
            elements,
            chain_model,
            split,
            manifold_dim,
        };
        if let Some(model) = &sys.chain_model {
            sys.validate_model(model, lit(MODEL_TOL))?;
        }
        Ok(sys)
    }

    fn validate_model(&self, model: &FilteredComplex<T>, tol: T) -> Result<()> {
        if model.n_levels() != self.elements.len() {
            return Err(Error::DimensionMismatch {
                context: "chain model levels",
                expected: self.elements.len(),
                found: model.n_levels(),
            });
        }
        let degrees = model.complex().len();
        for (p, e) in self.elements.iter().enumerate() {
            let mismatch = |reason: String| Error::ModelMismatch {
                level: p,
                id: e.id().into(),
                reason,
            };
            if e.top_degree() >= degrees {
                return Err(mismatch(format!(
                    "element needs degree {} but the model stops at {}",
                    e.top_degree(),
                    degrees.saturating_sub(1)
                )));
            }
            let piece = model.subquotient(p, p)?;
            let expected = e.piece(degrees);
            let got_betti = betti_numbers(piece.complex(), tol)?;
            let want_betti = betti_numbers(&expected, tol)?;
            if got_betti != want_betti {
                return Err(mismatch(format!(
                    "Betti numbers {got_betti:?}, expected {want_betti:?}"
                )));
            }
            if piece.complex().dims() != expected.dims() {
                return Err(mismatch(format!(
                    "level dimensions {:?}, expected {:?}",
                    piece.complex().dims(),
                    expected.dims()
                )));
            }
            if let CriticalElement::Orbit(o) = e {
                let block = piece.complex().d(o.index);
                let want = expected.d(o.index);
                let dev = frobenius(&(&block - &want));
                if dev > tol * frobenius(&want).max(T::one()) {
                    return Err(mismatch(format!(
                        "orbit block differs from the inverse twisted holonomy minus one by {:e}",
                        to_f64(dev)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn elements(&self) -> &[CriticalElement<T>] {
        &self.elements
    }

    pub fn chain_model(&self) -> Option<&FilteredComplex<T>> {
        self.chain_model.as_ref()
    }

    pub fn is_split(&self) -> bool {
        self.split
    }

    pub fn manifold_dim(&self) -> Option<usize> {
        self.manifold_dim
    }

    pub fn orbits(&self) -> impl Iterator<Item = &ClosedOrbitDatum<T>> {
        self.elements.iter().filter_map(|e| match e {
            CriticalElement::Orbit(o) => Some(o),
            CriticalElement::Fixed(_) => None,
        })
    }

    pub fn fixed_points(&self) -> impl Iterator<Item = &FixedPointDatum<T>> {
        self.elements.iter().filter_map(|e| match e {
            CriticalElement::Fixed(x) => Some(x),
            CriticalElement::Orbit(_) => None,
        })
    }

    /// Number of degrees of the model: the chain model's, or one past the
    /// highest degree used by any element.
    pub fn degrees(&self) -> usize {
        match &self.chain_model {
            Some(m) => m.complex().len(),
            None => self.elements.iter().map(|e| e.top_degree() + 1).max().unwrap_or(1),
        }
    }

    /// Block-diagonal chain model with every connecting map zero.
    pub fn split_model(&self) -> FilteredComplex<T> {
        let degrees = self.degrees();
        let mut total = CochainComplex::zero_differentials(vec![0; degrees]);
        let mut levels: Vec<Vec<usize>> = vec![Vec::new(); degrees];
        for (p, e) in self.elements.iter().enumerate() {
            let piece = e.piece(degrees);
            for (k, lv) in levels.iter_mut().enumerate() {
                lv.extend(std::iter::repeat_n(p, piece.dim(k)));
            }
            total = total.direct_sum(&piece);
        }
        // direct_sum appends coordinates, so levels follow element order
        FilteredComplex::new(total, levels, self.elements.len().max(1))
            .expect("block-diagonal model respects levels")
    }

    /// The chain model, or the split model when the split flag is set.
    pub fn model(&self) -> Result<FilteredComplex<T>> {
        match (&self.chain_model, self.split) {
            (Some(m), _) => Ok(m.clone()),
            (None, true) => Ok(self.split_model()),
            (None, false) => Err(Error::NoChainModel),
        }
    }

    /// Same elements with an explicit chain model and the split flag
    /// cleared.
    pub fn with_model(&self, model: FilteredComplex<T>) -> Result<Self> {
        Self::with_dimension(self.rank, self.elements.clone(), Some(model), false, self.manifold_dim)
    }

    /// Conjugates the holonomy of every orbit by `p` and every chain-model
    /// block accordingly (each basis vector's fiber coordinates by `p`).
    pub fn conjugated(&self, p: &CMatrix<T>) -> Result<Self> {
        let p_inv = p.clone().try_inverse().ok_or(Error::SingularTransport("conjugation".into()))?;
        let elements = self
            .elements
            .iter()
            .map(|e| match e {
                CriticalElement::Orbit(o) => {
                    let mut o = o.clone();
                    o.holonomy = p * &o.holonomy * &p_inv;
                    CriticalElement::Orbit(o)
                }
                CriticalElement::Fixed(x) => CriticalElement::Fixed(x.clone()),
            })
            .collect();
        let model = match &self.chain_model {
            None => None,
            Some(m) => {
                let c = m.complex();
                let mut phi = Vec::with_capacity(c.len());
                for k in 0..c.len() {
                    let mut block = CMatrix::identity(c.dim(k), c.dim(k));
                    for (level, e) in self.elements.iter().enumerate() {
                        if !matches!(e, CriticalElement::Orbit(_)) {
                            continue;
                        }
                        let idx: Vec<usize> =
                            (0..c.dim(k)).filter(|&j| m.level(k, j) == level).collect();
                        for (a, &i) in idx.iter().enumerate() {
                            for (b, &j) in idx.iter().enumerate() {
                                block[(i, j)] = p[(a, b)];
                            }
                        }
                    }
                    phi.push(block);
                }
                Some(FilteredComplex::new(c.transported(&phi)?, m.levels().to_vec(), m.n_levels())?)
            }
        };
        Self::with_dimension(self.rank, elements, model, self.split, self.manifold_dim)
    }
}
