use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use milnor::algebra::{
    berezin_integral, kernel_basis, pfaffian, pfaffian_berezin, psi_dim_one, wedge_gram_norm, AntisymMatrix,
    Multivector,
};
use milnor::sampling::{random_gram, random_matrix};
use milnor::scalar::{frobenius, CVector};
use milnor::Error;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn antisym(n: usize, rng: &mut ChaCha8Rng) -> AntisymMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
    AntisymMatrix::antisymmetrize(&m).unwrap()
}

fn random_multivector(n: usize, rng: &mut ChaCha8Rng) -> Multivector<f64> {
    let mut w = Multivector::zero(n).unwrap();
    for mask in 0u64..(1 << n) {
        if rng.gen_bool(0.5) {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let c = Complex::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            w = &w + &Multivector::blade(n, &idx, c).unwrap();
        }
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn pfaffian_squares_to_determinant(seed: u64, half in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = antisym(2 * half, &mut rng);
        let pf = pfaffian(&a);
        prop_assert!(rel(pf * pf, a.entries().clone().determinant()) < 1e-9);
        prop_assert!(rel(pfaffian_berezin(&a).unwrap(), pf) < 1e-9);
    }

    #[test]
    fn pfaffian_congruence(seed: u64, half in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 * half;
        let a = antisym(n, &mut rng);
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
        let bab = AntisymMatrix::antisymmetrize(&(&b * a.entries() * b.transpose())).unwrap();
        prop_assert!(rel(pfaffian(&bab), b.determinant() * pfaffian(&a)) < 1e-9);
    }

    #[test]
    fn odd_pfaffian_vanishes(seed: u64, half in 0usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = antisym(2 * half + 1, &mut rng);
        prop_assert_eq!(pfaffian(&a), 0.0);
        prop_assert!(pfaffian_berezin(&a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn berezin_integral_is_linear(seed: u64, n in 1usize..=5, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_multivector(n, &mut rng);
        let w = random_multivector(n, &mut rng);
        let c = Complex::new(re, im);
        let lhs = berezin_integral(&(&v.scale(c) + &w));
        let rhs = berezin_integral(&v) * c + berezin_integral(&w);
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        let mut below_top = w.clone();
        below_top = &below_top - &Multivector::blade(n, &(0..n).collect::<Vec<_>>(), w.top_coefficient()).unwrap();
        prop_assert_eq!(berezin_integral(&below_top), Complex::new(0.0, 0.0));
    }

    #[test]
    fn wedge_norm_ignores_order(seed: u64, n in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=n);
        let g = random_gram::<f64, _>(n, &mut rng);
        let m = random_matrix::<f64, _>(n, k, &mut rng);
        let vectors: Vec<CVector<f64>> = m.column_iter().map(|c| c.into_owned()).collect();
        let mut shuffled = vectors.clone();
        for i in (1..k).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        let a = wedge_gram_norm(&vectors, &g).unwrap();
        let b = wedge_gram_norm(&shuffled, &g).unwrap();
        prop_assert!(rel(b, a) < 1e-12);
    }

    #[test]
    fn kernel_vectors_are_annihilated(seed: u64, rows in 1usize..=6, cols in 1usize..=6, rank in 0usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rank.min(rows).min(cols);
        let m = random_matrix::<f64, _>(rows, r, &mut rng) * random_matrix::<f64, _>(r, cols, &mut rng);
        let basis = kernel_basis(&m, 1e-9);
        prop_assert_eq!(basis.len(), cols - r);
        for v in &basis {
            prop_assert!((&m * v).norm() <= 1e-9 * frobenius(&m).max(1.0));
        }
    }

    #[test]
    fn psi_is_odd(y in prop_oneof![-100.0f64..-1e-6, 1e-6f64..100.0]) {
        prop_assert_eq!(psi_dim_one(-y).unwrap(), -psi_dim_one(y).unwrap());
    }
}

#[test]
fn psi_examples() {
    assert_eq!(psi_dim_one(3.0).unwrap(), -0.5);
    assert_eq!(psi_dim_one(-3.0).unwrap(), 0.5);
    assert!(matches!(psi_dim_one(0.0), Err(Error::ZeroSection)));
}

#[test]
fn antisymmetry_is_exact() {
    let mut m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    assert!(AntisymMatrix::new(m.clone()).is_ok());
    m[(1, 0)] = -1.0 + 1e-15;
    assert!(AntisymMatrix::new(m).is_err());
}
