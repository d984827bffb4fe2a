//! Randomized self-check suites over the identities the library
//! implements. Each suite draws its cases from a ChaCha stream seeded by the
//! caller, so reports are reproducible.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    beta_rank_one, det, log_abs_det, pfaffian, pfaffian_berezin, psi_dim_one, AntisymMatrix, GramMetric,
};
use crate::complex::{
    canonical_element_log_norm, canonical_element_log_norm_with_lifts, fusion_order_invariance_check,
    level_lines, wedge_oracle_log_norm, CochainComplex, DetGenerator, GradedMetric,
};
use crate::complex::cohomology::whitened_spectra;
use crate::error::Result;
use crate::flow::{compare_milnor, orbit_line_metric, ClosedOrbitDatum, Orientation, Sign};
use crate::rs_circle::{bz_check_circle, zeta_reg_det, CircleRSSpec, HurwitzParams};
use crate::sampling::{
    random_acyclic_complex, random_eigenvalue_avoiding_one, random_filtered_complex, random_graded_metric,
    random_matrix, random_surgery, random_system, random_unitary, random_with_spectrum, SystemShape,
};
use crate::scalar::{cplx, CMatrix};
use crate::zeta::check_prop;

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    /// Largest error observed; infinite if a case raised an error.
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// First error raised, if any.
    pub failure: Option<String>,
}

struct Suite {
    name: &'static str,
    cases: usize,
    tolerance: f64,
    run: fn(&mut ChaCha8Rng) -> Result<f64>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_antisym(n: usize, rng: &mut ChaCha8Rng) -> AntisymMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
    AntisymMatrix::antisymmetrize(&m).expect("antisymmetrized matrix")
}

fn pfaffian_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = [2, 4, 6][rng.gen_range(0..3)];
    let a = random_antisym(n, rng);
    let pf = pfaffian(&a);
    let d = det(&a.entries().map(|x| cplx(x, 0.0)))?.re;
    let mut err = rel(pf * pf, d);
    err = err.max(rel(pfaffian_berezin(&a)?, pf));
    if n <= 4 {
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
        let bab = AntisymMatrix::antisymmetrize(&(&b * a.entries() * b.transpose()))?;
        let det_b = det(&b.map(|x| cplx(x, 0.0)))?.re;
        err = err.max(rel(pfaffian(&bab), det_b * pf));
    }
    Ok(err)
}

fn block_metric(a: &GramMetric<f64>, b: &GramMetric<f64>) -> Result<GramMetric<f64>> {
    let (m, n) = (a.dim(), b.dim());
    let mut g = CMatrix::zeros(m + n, m + n);
    g.view_mut((0, 0), (m, m)).copy_from(a.matrix());
    g.view_mut((m, m), (n, n)).copy_from(b.matrix());
    GramMetric::new(g)
}

fn multiplicativity_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let a = random_acyclic_complex::<f64, _>(rng.gen_range(2..=4), 3, rng);
    let b = random_acyclic_complex::<f64, _>(a.len(), 3, rng);
    let ga = random_graded_metric(a.dims(), rng);
    let gb = random_graded_metric(b.dims(), rng);
    let sum = a.direct_sum(&b);
    let gs = GradedMetric::new(
        ga.metrics()
            .iter()
            .zip(gb.metrics())
            .map(|(x, y)| block_metric(x, y))
            .collect::<Result<_>>()?,
    );
    let la = canonical_element_log_norm(&a, &ga, 1e-9)?;
    let lb = canonical_element_log_norm(&b, &gb, 1e-9)?;
    let ls = canonical_element_log_norm(&sum, &gs, 1e-9)?;
    Ok((ls - la - lb).abs())
}

/// Lifts `s^k` = (coimage lifts) `G` + (kernel vectors) `R` for random `G`,
/// `R`.
fn random_lifts(c: &CochainComplex<f64>, rng: &mut ChaCha8Rng) -> Result<Vec<CMatrix<f64>>> {
    let g = GradedMetric::standard(c.dims());
    let (svds, ranks) = whitened_spectra(c, &g, 1e-9)?;
    Ok((0..c.len())
        .map(|k| {
            let s = svds[k].coimage(ranks[k]);
            let kernel = svds[k].kernel(ranks[k]);
            let mix = crate::sampling::random_conditioned::<f64, _>(ranks[k], 0.5, 2.0, rng);
            let noise = random_matrix::<f64, _>(kernel.ncols(), ranks[k], rng);
            s * mix + kernel * noise
        })
        .collect())
}

fn lift_independence_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = random_acyclic_complex::<f64, _>(rng.gen_range(2..=4), 3, rng);
    let g = random_graded_metric(c.dims(), rng);
    let reference = canonical_element_log_norm(&c, &g, 1e-9)?;
    let lifts = random_lifts(&c, rng)?;
    Ok((canonical_element_log_norm_with_lifts(&c, &g, &lifts)? - reference).abs())
}

fn oracle_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = random_acyclic_complex::<f64, _>(rng.gen_range(2..=4), 3, rng);
    let g = random_graded_metric(c.dims(), rng);
    let production = canonical_element_log_norm(&c, &g, 1e-9)?;
    let oracle = wedge_oracle_log_norm(&c, &g, &DetGenerator::unit(c.dims()))?;
    Ok((production - oracle).abs())
}

fn fusion_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let f = random_filtered_complex::<f64, _>(4, 3, 4, rng);
    let metrics: Vec<GradedMetric<f64>> = (0..4)
        .map(|p| Ok(random_graded_metric(f.subquotient(p, p)?.complex().dims(), rng)))
        .collect::<Result<_>>()?;
    let lines = level_lines(&f, &metrics, 1e-9)?;
    fusion_order_invariance_check(&f, &lines, 5, rng, 1e-9)
}

fn circle_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let r = rng.gen_range(1..=4);
    let eigs: Vec<_> = (0..r)
        .map(|_| random_eigenvalue_avoiding_one::<f64, _>(0.1, rng))
        .collect();
    let a = random_with_spectrum(&eigs, rng);
    let o = ClosedOrbitDatum::new("a", 0, 1.0, Sign::Plus, a.clone(), Orientation::Positive)?;
    let line = orbit_line_metric(&o, 1e-9)?;
    let c = crate::flow::orbit_piece(&o);
    let norm = line.log_norm_of(&c, &DetGenerator::unit(c.dims()), 1e-9)?;
    let inv = a.try_inverse().expect("invertible");
    let expected = -log_abs_det(&(CMatrix::identity(r, r) - inv))?;
    Ok((norm - expected).abs())
}

fn prop_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let shape = SystemShape {
        max_orbits: 5,
        max_fixed: 0,
        max_rank: 4,
        max_index: 2,
        gap: 0.1,
        chain_model: rng.gen_bool(0.5),
    };
    Ok(check_prop(&random_system::<f64, _>(shape, rng), 1e-9)?.residual)
}

fn franks_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let shape = SystemShape {
        max_orbits: 3,
        max_fixed: 2,
        max_rank: 3,
        max_index: 2,
        gap: 0.0,
        chain_model: true,
    };
    let sys = random_system::<f64, _>(shape, rng);
    let surgery = random_surgery(&sys, rng);
    Ok(compare_milnor(&sys, &surgery, 1e-9)?.residual)
}

fn rs_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let r = rng.gen_range(1..=4);
    let u = random_unitary::<f64, _>(r, rng);
    let phases: Vec<f64> = (0..r).map(|_| rng.gen_range(0.05..0.95)).collect();
    let d = CMatrix::from_fn(r, r, |i, j| {
        if i == j {
            let t = std::f64::consts::TAU * phases[i];
            cplx(t.cos(), t.sin())
        } else {
            cplx(0.0, 0.0)
        }
    });
    let spec = CircleRSSpec::from_unitary(&u * d * u.adjoint())?;
    Ok(bz_check_circle(&spec, HurwitzParams::default(), 1e-9)?.residual)
}

fn det_closed_form_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let alpha: f64 = rng.gen_range(0.05..0.95);
    let closed = 4.0 * (std::f64::consts::PI * alpha).sin().powi(2);
    Ok(rel(zeta_reg_det(alpha, HurwitzParams::default())?, closed))
}

fn psi_case(rng: &mut ChaCha8Rng) -> Result<f64> {
    let y: f64 = rng.gen_range(0.5..=2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    // T = u^2, integrand 2u beta_{u^2}; Simpson on [0, 40/|y|]
    let upper = 40.0 / y.abs();
    let n = 4000;
    let h = upper / n as f64;
    let f = |u: f64| -> Result<f64> {
        if u == 0.0 {
            // 2u beta ~ -y / sqrt(pi) as u -> 0
            return Ok(-y / std::f64::consts::PI.sqrt());
        }
        Ok(2.0 * u * beta_rank_one(y, u * u)?)
    };
    let mut sum = f(0.0)? + f(upper)?;
    for i in 1..n {
        sum += f(i as f64 * h)? * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    Ok((sum * h / 3.0 - psi_dim_one(y)?).abs())
}

fn suites() -> Vec<Suite> {
    vec![
        Suite { name: "pfaffian", cases: 60, tolerance: 1e-9, run: pfaffian_case },
        Suite { name: "torsion_multiplicativity", cases: 60, tolerance: 1e-9, run: multiplicativity_case },
        Suite { name: "lift_independence", cases: 60, tolerance: 1e-9, run: lift_independence_case },
        Suite { name: "wedge_oracle", cases: 40, tolerance: 1e-9, run: oracle_case },
        Suite { name: "fusion_order", cases: 10, tolerance: 1e-9, run: fusion_case },
        Suite { name: "circle_norm", cases: 60, tolerance: 1e-9, run: circle_case },
        Suite { name: "milnor_equals_zeta", cases: 30, tolerance: 1e-10, run: prop_case },
        Suite { name: "franks_comparison", cases: 20, tolerance: 1e-9, run: franks_case },
        Suite { name: "ray_singer_equals_milnor", cases: 20, tolerance: 1e-8, run: rs_case },
        Suite { name: "zeta_determinant", cases: 20, tolerance: 1e-8, run: det_closed_form_case },
        Suite { name: "psi_rank_one", cases: 4, tolerance: 1e-6, run: psi_case },
    ]
}

/// Runs every suite with its own stream derived from `seed`.
pub fn selfcheck(seed: u64) -> Vec<SuiteReport> {
    suites()
        .into_iter()
        .enumerate()
        .map(|(i, suite)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut max_error: f64 = 0.0;
            let mut failure = None;
            for _ in 0..suite.cases {
                match (suite.run)(&mut rng) {
                    Ok(e) if e.is_finite() => max_error = max_error.max(e),
                    Ok(e) => {
                        max_error = f64::INFINITY;
                        failure.get_or_insert(format!("non-finite error {e}"));
                    }
                    Err(e) => {
                        max_error = f64::INFINITY;
                        failure.get_or_insert(e.to_string());
                    }
                }
            }
            SuiteReport {
                name: suite.name,
                cases: suite.cases,
                max_error,
                tolerance: suite.tolerance,
                passed: failure.is_none() && max_error < suite.tolerance,
                failure,
            }
        })
        .collect()
}
