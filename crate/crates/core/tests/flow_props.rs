use nalgebra::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use milnor::flow::{
    compare_milnor, milnor_metric, orbit_line_metric, orbit_piece, ClosedOrbitDatum, CriticalElement,
    FixedPointDatum, MorseSmaleSystem, Orientation, Sign, SurgeryDatum, SurgeryMap,
};
use milnor::algebra::GramMetric;
use milnor::complex::DetGenerator;
use milnor::sampling::{random_conditioned, random_orbit, random_surgery, random_system, SystemShape};
use milnor::scalar::{cmatrix_from_rows, CMatrix};
use milnor::Error;

const TOL: f64 = 1e-9;

fn shape(max_fixed: usize, gap: f64, chain_model: bool) -> SystemShape {
    SystemShape {
        max_orbits: 3,
        max_fixed,
        max_rank: 3,
        max_index: 2,
        gap,
        chain_model,
    }
}

fn log_abs_det(m: &CMatrix<f64>) -> f64 {
    m.clone().determinant().norm().ln()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(32) })]

    #[test]
    fn milnor_norm_is_conjugation_invariant(seed: u64, model: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system::<f64, _>(shape(0, 0.1, model), &mut rng);
        let p = random_conditioned::<f64, _>(sys.rank(), 0.5, 2.0, &mut rng);
        let before = milnor_metric(&sys, TOL).unwrap().log_norm_of_unit(TOL).unwrap();
        let after = milnor_metric(&sys.conjugated(&p).unwrap(), TOL).unwrap().log_norm_of_unit(TOL).unwrap();
        prop_assert!((after - before).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_gram_scaling_shifts_log_norm(seed: u64, c in 0.1f64..10.0, model: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system::<f64, _>(SystemShape { max_fixed: 3, ..shape(0, 0.0, model) }, &mut rng);
        let Some(pos) = sys.elements().iter().position(|e| matches!(e, CriticalElement::Fixed(_))) else {
            return Ok(());
        };
        let mut elements = sys.elements().to_vec();
        let CriticalElement::Fixed(x) = &elements[pos] else { unreachable!() };
        let index = x.index;
        let scaled = FixedPointDatum::new(x.id.clone(), index, x.gram.scaled(c));
        elements[pos] = CriticalElement::Fixed(scaled);
        let scaled_sys = MorseSmaleSystem::new(sys.rank(), elements, sys.chain_model().cloned(), sys.is_split()).unwrap();
        let before = milnor_metric(&sys, TOL).unwrap();
        let after = milnor_metric(&scaled_sys, TOL).unwrap();
        let shift = after.line.log_norm_of(&after.complex, &before.line.generator, TOL).unwrap() - before.line.log_norm;
        let sign = if index % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((shift - sign * sys.rank() as f64 / 2.0 * c.ln()).abs() < 1e-9);
    }

    #[test]
    fn orientation_reversal_inverts_twisted_holonomy(seed: u64, rank in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o: ClosedOrbitDatum<f64> = random_orbit("g", rank, 0, 0.1, &mut rng);
        let r = o.reversed();
        let a = o.twisted_holonomy();
        let id = CMatrix::identity(rank, rank);
        let unit = |o: &ClosedOrbitDatum<f64>| {
            let c = orbit_piece(o);
            orbit_line_metric(o, TOL).unwrap().log_norm_of(&c, &DetGenerator::unit(c.dims()), TOL).unwrap()
        };
        prop_assert!((unit(&o) + log_abs_det(&(&id - a.clone().try_inverse().unwrap()))).abs() < 1e-9);
        prop_assert!((unit(&r) + log_abs_det(&(&id - &a))).abs() < 1e-9);
    }

    #[test]
    fn split_flag_matches_block_diagonal_model(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system::<f64, _>(shape(2, 0.0, false), &mut rng);
        let explicit = sys.with_model(sys.split_model()).unwrap();
        let a = milnor_metric(&sys, TOL).unwrap();
        let b = milnor_metric(&explicit, TOL).unwrap();
        prop_assert_eq!(&a.betti, &b.betti);
        let l = b.line.log_norm_of(&b.complex, &a.line.generator, TOL).unwrap();
        prop_assert!((l - a.line.log_norm).abs() < 1e-9);
    }

    #[test]
    fn franks_comparison_holds(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system::<f64, _>(shape(2, 0.0, true), &mut rng);
        let surgery = random_surgery(&sys, &mut rng);
        let cmp = compare_milnor(&sys, &surgery, TOL).unwrap();
        prop_assert!(cmp.residual < 1e-9, "lhs {} rhs {}", cmp.lhs, cmp.rhs);
    }

    #[test]
    fn orbit_and_fixed_point_order_is_kept(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system::<f64, _>(shape(2, 0.0, rng.gen_bool(0.5)), &mut rng);
        let ids: Vec<&str> = sys.elements().iter().map(|e| e.id()).collect();
        let model_levels = sys.model().unwrap().n_levels();
        prop_assert_eq!(model_levels, ids.len());
    }
}

fn one_orbit(index: usize, rho: f64) -> MorseSmaleSystem<f64> {
    let o = ClosedOrbitDatum::new("g", index, 1.0, Sign::Plus, cmatrix_from_rows(1, 1, &[rho]), Orientation::Positive)
        .unwrap();
    MorseSmaleSystem::new(1, vec![CriticalElement::Orbit(o)], None, true).unwrap()
}

fn surgery(tau: f64, n_a: Sign, n_a_prime: Sign) -> SurgeryMap<f64> {
    [(
        "g".to_string(),
        SurgeryDatum {
            tau: cmatrix_from_rows(1, 1, &[tau]),
            n_a,
            n_a_prime,
            gram_x: GramMetric::identity(1),
            gram_x_prime: GramMetric::identity(1),
        },
    )]
    .into_iter()
    .collect()
}

#[test]
fn franks_examples() {
    let trivial = compare_milnor(&one_orbit(0, 2.0), &surgery(1.0, Sign::Plus, Sign::Minus), TOL).unwrap();
    assert!(trivial.lhs.abs() < 1e-12 && trivial.rhs.abs() < 1e-12);
    for index in 0..2 {
        let cmp = compare_milnor(&one_orbit(index, 2.0), &surgery(3.0, Sign::Plus, Sign::Minus), TOL).unwrap();
        let sign = if index % 2 == 0 { 1.0 } else { -1.0 };
        assert!((cmp.rhs - sign * 9f64.ln()).abs() < 1e-12);
        assert!(cmp.residual < 1e-9);
    }
}

#[test]
fn sign_constraint_is_checked() {
    let err = compare_milnor(&one_orbit(0, 2.0), &surgery(1.0, Sign::Plus, Sign::Plus), TOL).unwrap_err();
    assert!(matches!(err, Error::SignConstraint(id) if id == "g"));
}

#[test]
fn milnor_examples() {
    // rank-one orbit with ρ = 2: the piece is C --(-1/2)--> C
    let m = milnor_metric(&one_orbit(0, 2.0), TOL).unwrap();
    assert!((m.log_norm_of_unit(TOL).unwrap() - 2f64.ln()).abs() < 1e-14);
    let m = milnor_metric(&one_orbit(1, 2.0), TOL).unwrap();
    assert!((m.log_norm_of_unit(TOL).unwrap() + 2f64.ln()).abs() < 1e-14);
    // trivial holonomy: non-acyclic piece normalized by σ
    let m = milnor_metric(&one_orbit(0, 1.0), TOL).unwrap();
    assert_eq!(m.betti, vec![1, 1]);
    assert!(m.line.log_norm.abs() < 1e-14);
}

#[test]
fn singular_holonomy_is_rejected() {
    let err = ClosedOrbitDatum::new("g", 0, 1.0, Sign::Plus, cmatrix_from_rows(1, 1, &[0.0]), Orientation::Positive)
        .unwrap_err();
    assert!(matches!(err, Error::SingularHolonomy(_)));
    let twisted: CMatrix<f64> = CMatrix::from_element(1, 1, Complex::new(-1.0, 0.0));
    assert!(ClosedOrbitDatum::new("h", 0, 1.0, Sign::Minus, twisted, Orientation::Negative).is_ok());
}
