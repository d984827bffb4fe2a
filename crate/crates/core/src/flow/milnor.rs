//! Milnor metric of a Morse-Smale system.

use crate::complex::{
    cohomology, det_metric, fold_lines, CochainComplex, DetGenerator, FusionTree, GradedMetric,
    MetricedDetLine,
};
use crate::error::Result;
use crate::scalar::{lit, CMatrix, Real};

use super::system::{parity, ClosedOrbitDatum, CriticalElement, FixedPointDatum, MorseSmaleSystem};

/// The two-term orbit complex `C^r --(Ã^{-1} - 1)--> C^r` in degrees
/// `ind, ind + 1`.
pub fn orbit_piece<T: Real>(o: &ClosedOrbitDatum<T>) -> CochainComplex<T> {
    CriticalElement::Orbit(o.clone()).piece(o.index + 2)
}

/// Metric on `det H` of the orbit complex for which the image `σ` of the
/// canonical element `1 ∈ det C` has norm one. It is transported from any
/// metric that agrees in both degrees; the standard one is used.
pub fn orbit_line_metric<T: Real>(o: &ClosedOrbitDatum<T>, tol: T) -> Result<MetricedDetLine<T>> {
    let c = orbit_piece(o);
    let g = GradedMetric::standard(c.dims());
    det_metric(&c, &g, &cohomology(&c, &g, tol)?, tol)
}

/// `F_x` placed in degree `ind(x)`.
pub fn fixed_point_piece<T: Real>(x: &FixedPointDatum<T>) -> CochainComplex<T> {
    CriticalElement::Fixed(x.clone()).piece(x.index + 1)
}

/// `(det F_x)^{(-1)^{ind}}` with the fiber metric; the generator is the
/// wedge of the standard basis.
pub fn fixed_point_line<T: Real>(x: &FixedPointDatum<T>) -> MetricedDetLine<T> {
    let r = x.rank();
    let mut reps: Vec<CMatrix<T>> = (0..x.index).map(|_| CMatrix::zeros(0, 0)).collect();
    reps.push(CMatrix::identity(r, r));
    MetricedDetLine {
        generator: DetGenerator::new(reps),
        log_norm: parity::<T>(x.index) * x.gram.log_det() * lit(0.5),
    }
}

/// The same line with empty degrees appended up to `degrees`.
pub fn pad_line<T: Real>(line: &MetricedDetLine<T>, degrees: usize) -> MetricedDetLine<T> {
    let mut reps = line.generator.reps.clone();
    while reps.len() < degrees {
        reps.push(CMatrix::zeros(0, 0));
    }
    MetricedDetLine {
        generator: DetGenerator::new(reps),
        log_norm: line.log_norm,
    }
}

/// Metric on the graded piece of one element.
pub fn element_line<T: Real>(e: &CriticalElement<T>, degrees: usize, tol: T) -> Result<MetricedDetLine<T>> {
    let line = match e {
        CriticalElement::Fixed(x) => fixed_point_line(x),
        CriticalElement::Orbit(o) => orbit_line_metric(o, tol)?,
    };
    Ok(pad_line(&line, degrees))
}

/// Milnor metric on `λ = det H(X, F)` together with the cohomology it lives
/// on.
#[derive(Debug, Clone)]
pub struct MilnorMetric<T: Real> {
    pub line: MetricedDetLine<T>,
    pub betti: Vec<usize>,
    /// The complex computing `H(X, F)` whose coordinates the generator uses.
    pub complex: CochainComplex<T>,
}

impl<T: Real> MilnorMetric<T> {
    /// `log ‖1‖` of the canonical section when `H(X, F) = 0`.
    pub fn log_norm_of_unit(&self, tol: T) -> Result<T> {
        self.line
            .log_norm_of(&self.complex, &DetGenerator::unit(self.complex.dims()), tol)
    }
}

/// Assembles the Milnor metric: fuses the graded-piece metrics along the
/// chain model, or, for a split system, tensors them directly.
pub fn milnor_metric<T: Real>(sys: &MorseSmaleSystem<T>, tol: T) -> Result<MilnorMetric<T>> {
    let degrees = sys.degrees();
    let lines = sys
        .elements()
        .iter()
        .map(|e| element_line(e, degrees, tol))
        .collect::<Result<Vec<_>>>()?;
    match sys.chain_model() {
        Some(model) if !sys.elements().is_empty() => {
            let line = fold_lines(model, &lines, &FusionTree::left_comb(lines.len()), tol)?;
            let complex = model.complex().clone();
            let betti = crate::complex::betti_numbers(&complex, tol)?;
            Ok(MilnorMetric {
                line,
                betti,
                complex,
            })
        }
        _ => {
            let model = sys.model()?;
            let complex = model.complex().clone();
            let mut reps: Vec<CMatrix<T>> = Vec::with_capacity(degrees);
            let mut betti = Vec::with_capacity(degrees);
            for k in 0..degrees {
                let cols: usize = lines.iter().map(|l| l.generator.reps[k].ncols()).sum();
                let mut m = CMatrix::zeros(complex.dim(k), cols);
                let (mut row, mut col) = (0, 0);
                for l in &lines {
                    let r = &l.generator.reps[k];
                    m.view_mut((row, col), (r.nrows(), r.ncols())).copy_from(r);
                    row += r.nrows();
                    col += r.ncols();
                }
                betti.push(cols);
                reps.push(m);
            }
            let log_norm = lines.iter().fold(T::zero(), |acc, l| acc + l.log_norm);
            Ok(MilnorMetric {
                line: MetricedDetLine {
                    generator: DetGenerator::new(reps),
                    log_norm,
                },
                betti,
                complex,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GramMetric;
    use crate::flow::system::{Orientation, Sign};
    use crate::scalar::cmatrix_from_rows;
    use approx::assert_relative_eq;

    const TOL: f64 = 1e-9;

    fn orbit(index: usize, twist: Sign, rho: f64) -> ClosedOrbitDatum<f64> {
        ClosedOrbitDatum::new("g", index, 1.0, twist, cmatrix_from_rows(1, 1, &[rho]), Orientation::Positive)
            .unwrap()
    }

    fn unit_norm(line: &MetricedDetLine<f64>, c: &CochainComplex<f64>) -> f64 {
        line.log_norm_of(c, &DetGenerator::unit(c.dims()), TOL).unwrap().exp()
    }

    #[test]
    fn orbit_piece_examples() {
        assert_eq!(orbit_piece(&orbit(0, Sign::Plus, 1.0)).d(0)[(0, 0)].re, 0.0);
        assert_relative_eq!(orbit_piece(&orbit(0, Sign::Plus, 2.0)).d(0)[(0, 0)].re, -0.5);
        assert_eq!(orbit_piece(&orbit(0, Sign::Minus, -1.0)).d(0)[(0, 0)].re, 0.0);
    }

    #[test]
    fn orbit_line_examples() {
        let o = orbit(0, Sign::Plus, 2.0);
        assert_relative_eq!(unit_norm(&orbit_line_metric(&o, TOL).unwrap(), &orbit_piece(&o)), 2.0, epsilon = 1e-14);
        let o = orbit(0, Sign::Plus, -1.0);
        assert_relative_eq!(unit_norm(&orbit_line_metric(&o, TOL).unwrap(), &orbit_piece(&o)), 0.5, epsilon = 1e-14);
        // trivial holonomy: σ is the class pair (1, 1) of unit norm
        let o = orbit(0, Sign::Plus, 1.0);
        assert_relative_eq!(orbit_line_metric(&o, TOL).unwrap().log_norm, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn fixed_point_line_examples() {
        let x = FixedPointDatum::<f64>::new("x", 0, GramMetric::identity(3));
        assert_eq!(fixed_point_line(&x).log_norm, 0.0);
        let g = GramMetric::diagonal(&[4.0, 9.0]).unwrap();
        let even = FixedPointDatum::new("x", 2, g.clone());
        assert_relative_eq!(fixed_point_line(&even).log_norm, 0.5 * 36f64.ln(), epsilon = 1e-14);
        let odd = FixedPointDatum::new("x", 1, g);
        assert_relative_eq!(fixed_point_line(&odd).log_norm, -0.5 * 36f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn milnor_examples() {
        let x = FixedPointDatum::new("x", 0, GramMetric::identity(1));
        let sys = MorseSmaleSystem::new(1, vec![CriticalElement::Fixed(x)], None, true).unwrap();
        let m = milnor_metric(&sys, TOL).unwrap();
        assert_eq!(m.betti, vec![1]);
        assert_eq!(m.line.log_norm, 0.0);

        let sys = MorseSmaleSystem::new(1, vec![CriticalElement::Orbit(orbit(1, Sign::Plus, 2.0))], None, true)
            .unwrap();
        let m = milnor_metric(&sys, TOL).unwrap();
        assert_eq!(m.betti, vec![0, 0, 0]);
        assert_relative_eq!(m.log_norm_of_unit(TOL).unwrap().exp(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn split_flag_and_explicit_model_agree() {
        let x = FixedPointDatum::new("x", 1, GramMetric::diagonal(&[3.0]).unwrap());
        let elements = vec![
            CriticalElement::Orbit(orbit(0, Sign::Plus, 1.0)),
            CriticalElement::Fixed(x),
            CriticalElement::Orbit(orbit(1, Sign::Minus, 0.25)),
        ];
        let mut elements = elements;
        if let CriticalElement::Orbit(o) = &mut elements[2] {
            o.id = "h".into();
        }
        let split = MorseSmaleSystem::new(1, elements, None, true).unwrap();
        let explicit = split.with_model(split.split_model()).unwrap();
        let a = milnor_metric(&split, TOL).unwrap();
        let b = milnor_metric(&explicit, TOL).unwrap();
        assert_eq!(a.betti, b.betti);
        let l = b.line.log_norm_of(&b.complex, &a.line.generator, TOL).unwrap();
        assert_relative_eq!(l, a.line.log_norm, epsilon = 1e-12);
    }

    #[test]
    fn model_with_wrong_orbit_block_is_rejected() {
        let o = orbit(0, Sign::Plus, 2.0);
        let c = CochainComplex::two_term(0, cmatrix_from_rows(1, 1, &[-0.25])).unwrap();
        let model = crate::complex::FilteredComplex::trivial(c);
        let err = MorseSmaleSystem::new(1, vec![CriticalElement::Orbit(o)], Some(model), false).unwrap_err();
        assert!(matches!(err, crate::Error::ModelMismatch { level: 0, .. }));
    }

    #[test]
    fn model_with_wrong_betti_is_rejected() {
        let o = orbit(0, Sign::Plus, 1.0);
        let c = CochainComplex::two_term(0, cmatrix_from_rows(1, 1, &[1.0])).unwrap();
        let model = crate::complex::FilteredComplex::trivial(c);
        let err = MorseSmaleSystem::new(1, vec![CriticalElement::Orbit(o)], Some(model), false).unwrap_err();
        assert!(matches!(&err, crate::Error::ModelMismatch { reason, .. } if reason.contains("Betti")));
        assert!(err.to_string().contains("does not realize the graded cohomology"));
    }
}
