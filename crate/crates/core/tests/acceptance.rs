//! Acceptance suite. Each criterion prints one PASS/FAIL line with its
//! worst observed error, tolerance and runtime.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use milnor::algebra::{beta_rank_one, pfaffian, pfaffian_berezin, psi_dim_one, AntisymMatrix};
use milnor::complex::{
    canonical_element_log_norm, canonical_element_log_norm_with_lifts, fusion_order_invariance_check,
    level_lines, wedge_oracle_log_norm, CochainComplex, DetGenerator, GradedMetric,
};
use milnor::flow::{compare_milnor, milnor_metric, orbit_piece, ClosedOrbitDatum, Orientation, Sign};
use milnor::rs_circle::{rs_log_norm_sq_circle, zeta_reg_det, CircleRSSpec, HurwitzParams};
use milnor::sampling::{
    random_acyclic_complex, random_conditioned, random_eigenvalue_avoiding_one, random_filtered_complex,
    random_graded_metric, random_matrix, random_surgery, random_system, random_unitary, random_with_spectrum,
    SystemShape,
};
use milnor::scalar::CMatrix;
use milnor::zeta::check_prop;
use milnor::GramMetricF64;

const TOL: f64 = 1e-9;

fn rng(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + criterion)
}

fn report(n: u32, name: &str, max_err: f64, tol: f64, elapsed: Duration, budget: Duration) {
    let ok = max_err < tol && elapsed < budget;
    println!(
        "criterion {n} {name}: {} max_err={max_err:.3e} tol={tol:.0e} time={:.3}s budget={}s",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    assert!(max_err < tol, "criterion {n}: error {max_err:e} exceeds {tol:e}");
    assert!(elapsed < budget, "criterion {n}: {elapsed:?} exceeds {budget:?}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `log |det M|` by nalgebra's own LU, independent of the library's.
fn log_abs_det_oracle(m: &CMatrix<f64>) -> f64 {
    m.clone().determinant().norm().ln()
}

/// Twisted holonomy `Δ ρ^{±1}` rebuilt from the raw orbit fields.
fn twisted(o: &ClosedOrbitDatum<f64>) -> CMatrix<f64> {
    let oriented = match o.orientation {
        Orientation::Positive => o.holonomy.clone(),
        Orientation::Negative => o.holonomy.clone().try_inverse().unwrap(),
    };
    let d = if o.twist == Sign::Plus { 1.0 } else { -1.0 };
    oriented * Complex::new(d, 0.0)
}

#[test]
fn criterion_1_circle_norm() {
    let mut rng = rng(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let r = rng.gen_range(1..=4);
        let eigs: Vec<Complex<f64>> = (0..r).map(|_| random_eigenvalue_avoiding_one(0.1, &mut rng)).collect();
        let a = random_with_spectrum(&eigs, &mut rng);
        let o = ClosedOrbitDatum::new("g", 0, 1.0, Sign::Plus, a.clone(), Orientation::Positive).unwrap();
        let c = orbit_piece(&o);
        let g = GradedMetric::standard(c.dims());
        let oracle = wedge_oracle_log_norm(&c, &g, &DetGenerator::unit(c.dims())).unwrap().exp();
        let inv = a.try_inverse().unwrap();
        let expected = (-log_abs_det_oracle(&(CMatrix::identity(r, r) - inv))).exp();
        worst = worst.max(rel(oracle, expected));
    }
    report(1, "circle norm", worst, 1e-9, start.elapsed(), Duration::from_secs(5));
}

#[test]
fn criterion_2_milnor_equals_zeta_at_zero() {
    let mut rng = rng(2);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let shape = SystemShape {
            max_orbits: 5,
            max_fixed: 0,
            max_rank: 4,
            max_index: 3,
            gap: 0.1,
            chain_model: i % 2 == 0,
        };
        let sys = random_system::<f64, _>(shape, &mut rng);
        let log_milnor = milnor_metric(&sys, TOL).unwrap().log_norm_of_unit(TOL).unwrap();
        let log_zeta: f64 = sys
            .orbits()
            .map(|o| {
                let n = o.rank();
                let m = CMatrix::identity(n, n) - twisted(o).try_inverse().unwrap();
                let s = if o.index % 2 == 0 { 1.0 } else { -1.0 };
                s * log_abs_det_oracle(&m)
            })
            .sum();
        worst = worst.max((log_milnor + log_zeta).abs());
        worst = worst.max(check_prop(&sys, TOL).unwrap().residual);
    }
    report(2, "milnor norm = |R(0)|^-1", worst, 1e-10, start.elapsed(), Duration::from_secs(10));
}

#[test]
fn criterion_3_fusion_order_independence() {
    let mut rng = rng(3);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let degrees = rng.gen_range(2..=4);
        let f = random_filtered_complex::<f64, _>(4, degrees, 4, &mut rng);
        let metrics: Vec<_> = (0..4)
            .map(|p| random_graded_metric(f.subquotient(p, p).unwrap().complex().dims(), &mut rng))
            .collect();
        let lines = level_lines(&f, &metrics, TOL).unwrap();
        worst = worst.max(fusion_order_invariance_check(&f, &lines, 10, &mut rng, TOL).unwrap());
    }
    report(3, "fusion order independence", worst, 1e-9, start.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_4_franks_comparison() {
    let mut rng = rng(4);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let shape = SystemShape {
            max_orbits: 3,
            max_fixed: 2,
            max_rank: 3,
            max_index: 2,
            gap: 0.0,
            chain_model: true,
        };
        let sys = random_system::<f64, _>(shape, &mut rng);
        let surgery = random_surgery(&sys, &mut rng);
        worst = worst.max(compare_milnor(&sys, &surgery, TOL).unwrap().residual);
    }
    report(4, "franks comparison", worst, 1e-9, start.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_5_ray_singer_equals_milnor() {
    let mut rng = rng(5);
    let start = Instant::now();
    let p = HurwitzParams::default();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let r = rng.gen_range(1..=4);
        let eigs: Vec<Complex<f64>> = (0..r)
            .map(|_| loop {
                let z = Complex::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
                if (z - 1.0).norm() >= 0.05 {
                    break z;
                }
            })
            .collect();
        let u = random_unitary::<f64, _>(r, &mut rng);
        let a = &u * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(eigs)) * u.adjoint();
        let spec = CircleRSSpec::from_unitary(a.clone()).unwrap();
        let log_rs = rs_log_norm_sq_circle(&spec, p).unwrap();
        let log_milnor = -2.0 * log_abs_det_oracle(&(CMatrix::identity(r, r) - a.try_inverse().unwrap()));
        worst = worst.max((log_rs - log_milnor).abs());
    }
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        let closed = 4.0 * (PI * alpha).sin().powi(2);
        worst = worst.max(rel(zeta_reg_det(alpha, p).unwrap(), closed));
    }
    report(5, "ray-singer = milnor on the circle", worst, 1e-8, start.elapsed(), Duration::from_secs(5));
}

fn random_antisym(n: usize, rng: &mut ChaCha8Rng) -> AntisymMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
    AntisymMatrix::antisymmetrize(&m).unwrap()
}

/// Pfaffian by expansion along the first row.
fn pfaffian_expansion(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 1.0;
    }
    (1..n)
        .map(|j| {
            let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
            let minor = DMatrix::from_fn(n - 2, n - 2, |r, c| a[(keep[r], keep[c])]);
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            sign * a[(0, j)] * pfaffian_expansion(&minor)
        })
        .sum()
}

#[test]
fn criterion_6_pfaffian_suite() {
    let mut rng = rng(6);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = [2, 4, 6][i % 3];
        let a = random_antisym(n, &mut rng);
        let pf = pfaffian(&a);
        let det = a.entries().clone().determinant();
        worst = worst.max(rel(pf * pf, det));
        worst = worst.max(rel(pf, pfaffian_expansion(a.entries())));
        worst = worst.max(rel(pfaffian_berezin(&a).unwrap(), pf));
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
        let bab = AntisymMatrix::antisymmetrize(&(&b * a.entries() * b.transpose())).unwrap();
        worst = worst.max(rel(pfaffian(&bab), b.determinant() * pf));
    }
    report(6, "pfaffian suite", worst, 1e-9, start.elapsed(), Duration::from_secs(5));
}

/// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// `∫_0^∞ beta_T dT` with `T = u^2`, composite Gauss-Legendre on
/// `[0, 40/|y|]`; the integrand decays like `exp(-u^2 y^2)`.
fn psi_quadrature(y: f64) -> f64 {
    let upper = 40.0 / y.abs();
    let panels = 400;
    let h = upper / panels as f64;
    (0..panels)
        .map(|i| {
            let mid = (i as f64 + 0.5) * h;
            GL5.iter()
                .map(|&(x, w)| {
                    let u = mid + 0.5 * h * x;
                    w * 2.0 * u * beta_rank_one(y, u * u).unwrap()
                })
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

#[test]
fn criterion_7_psi_rank_one() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for y in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
        let closed = -0.5 * f64::signum(y);
        worst = worst.max((psi_quadrature(y) - closed).abs());
        worst = worst.max((psi_dim_one(y).unwrap() - closed).abs());
    }
    report(7, "psi rank one", worst, 1e-6, start.elapsed(), Duration::from_secs(1));
}

fn block_metric(a: &GramMetricF64, b: &GramMetricF64) -> GramMetricF64 {
    let (m, n) = (a.dim(), b.dim());
    let mut g = CMatrix::zeros(m + n, m + n);
    g.view_mut((0, 0), (m, m)).copy_from(a.matrix());
    g.view_mut((m, m), (n, n)).copy_from(b.matrix());
    GramMetricF64::new(g).unwrap()
}

/// Lifts built in test code from the eigenvectors of `d_k^* d_k`: the
/// coimage part mixed by a random invertible matrix plus random kernel
/// vectors.
fn random_lifts(c: &CochainComplex<f64>, rng: &mut ChaCha8Rng) -> Vec<CMatrix<f64>> {
    (0..c.len())
        .map(|k| {
            let d = c.d(k);
            let n = c.dim(k);
            if n == 0 {
                return CMatrix::zeros(0, 0);
            }
            let eig = (d.adjoint() * &d).symmetric_eigen();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
            let rank = order.iter().filter(|&&i| eig.eigenvalues[i] > 1e-12).count();
            let cols = |idx: &[usize]| {
                let mut m = CMatrix::zeros(n, idx.len());
                for (t, &i) in idx.iter().enumerate() {
                    m.set_column(t, &eig.eigenvectors.column(i));
                }
                m
            };
            let coimage = cols(&order[..rank]);
            let kernel = cols(&order[rank..]);
            coimage * random_conditioned::<f64, _>(rank, 0.5, 2.0, rng)
                + &kernel * random_matrix::<f64, _>(kernel.ncols(), rank, rng)
        })
        .collect()
}

#[test]
fn criterion_8_multiplicativity_and_lift_independence() {
    let mut rng = rng(8);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let degrees = rng.gen_range(2..=5);
        let a = random_acyclic_complex::<f64, _>(degrees, 3, &mut rng);
        let b = random_acyclic_complex::<f64, _>(degrees, 3, &mut rng);
        let ga = random_graded_metric(a.dims(), &mut rng);
        let gb = random_graded_metric(b.dims(), &mut rng);
        let sum = a.direct_sum(&b);
        let gs = GradedMetric::new(ga.metrics().iter().zip(gb.metrics()).map(|(x, y)| block_metric(x, y)).collect());
        let la = canonical_element_log_norm(&a, &ga, TOL).unwrap();
        let lb = canonical_element_log_norm(&b, &gb, TOL).unwrap();
        let ls = canonical_element_log_norm(&sum, &gs, TOL).unwrap();
        worst = worst.max((ls - la - lb).abs());

        let lifts = random_lifts(&a, &mut rng);
        let with_lifts = canonical_element_log_norm_with_lifts(&a, &ga, &lifts).unwrap();
        worst = worst.max((with_lifts - la).abs());
    }
    report(8, "torsion multiplicativity and lift independence", worst, 1e-9, start.elapsed(), Duration::from_secs(10));
}
