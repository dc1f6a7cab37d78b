use omt::chartriple::{certificate_residual, characteristic_triple, coincide, theta_eval, Verdict};
use omt::fundamental::fundamental_ops;
use omt::hardy::schaffer_lift;
use omt::numkit::{c, polar_unitary, spectral_norm, unitarity_residual, ComplexMatrix, C64};
use omt::tuples::canonical_decomposition;
use omt::tuples::generate::{complex_gaussian, generate, random_unitary, rng_from_seed};
use omt::{ContractionTuple, GeneratorKind, TolerancePolicy};
use proptest::prelude::*;
use rand::Rng;

fn scalar(z: C64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, z)
}

fn disk_point() -> impl Strategy<Value = C64> {
    (0.0..0.95f64, 0.0..std::f64::consts::TAU).prop_map(|(r, arg)| C64::from_polar(r, arg))
}

fn kind() -> impl Strategy<Value = GeneratorKind> {
    prop::sample::select(GeneratorKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // For scalars, D_T² = 1 − |ab|², so F_1 = a(1 − |b|²)/(1 − |ab|²).
    #[test]
    fn scalar_fundamental_operators(a in disk_point(), b in disk_point()) {
        let t = ContractionTuple::new(vec![scalar(a), scalar(b)], TolerancePolicy::default()).unwrap();
        let f = fundamental_ops(&t).unwrap();
        let denom = 1.0 - (a * b).norm_sqr();
        let first = a * (1.0 - b.norm_sqr()) / denom;
        let second = b * (1.0 - a.norm_sqr()) / denom;
        prop_assert!((f.pairs[0].first[(0, 0)] - first).norm() < 1e-10);
        prop_assert!((f.pairs[0].second[(0, 0)] - second).norm() < 1e-10);
    }

    // Scalar characteristic function is the Möbius map (z − t)/(1 − t̄z).
    #[test]
    fn scalar_theta_is_mobius(t in disk_point(), z in disk_point()) {
        let value = theta_eval(&scalar(t), z, &TolerancePolicy::default()).unwrap();
        let mobius = (z - t) / (c(1.0, 0.0) - t.conj() * z);
        prop_assert!((value[(0, 0)] - mobius).norm() < 1e-10);
    }

    #[test]
    fn fundamental_pencils_stay_in_the_unit_ball(seed in 0u64..10_000, kind in kind(), dim in 1usize..5, d in 2usize..4) {
        let t = generate(kind, dim, d, seed, TolerancePolicy::default()).unwrap();
        let f = fundamental_ops(&t).unwrap();
        prop_assert!(f.checks.iter().all(|c| c.pass));
        prop_assert!(f.pencil_radius.iter().all(|&r| r <= 1.0 + 1e-6));
    }

    #[test]
    fn decomposition_splits_unitary_block(seed in 0u64..10_000, unitary_dim in 1usize..3, pure_dim in 1usize..3) {
        let tol = TolerancePolicy::default();
        let mut rng = rng_from_seed(seed);
        let unitary = ContractionTuple::new(
            (0..2)
                .map(|_| {
                    let phases: Vec<C64> = (0..unitary_dim).map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))).collect();
                    ComplexMatrix::from_diagonal(&phases.into())
                })
                .collect(),
            tol,
        )
        .unwrap();
        let pure = generate(GeneratorKind::UpperTriangularCommuting, pure_dim, 2, seed, tol).unwrap();
        let pure = ContractionTuple::new(pure.ops().iter().map(|m| m * c(0.9, 0.0)).collect(), tol).unwrap();
        let mixed = omt::tuples::block_diagonal(&unitary, &pure);
        let dec = canonical_decomposition(&mixed.conjugate(&random_unitary(mixed.dim(), &mut rng))).unwrap();
        prop_assert_eq!(dec.unitary_basis.rank(), unitary_dim);
        prop_assert_eq!(dec.cnu_basis.rank(), pure_dim);
        prop_assert!(dec.checks(&tol).iter().all(|c| c.pass));
    }

    #[test]
    fn polar_factor_is_unitary(seed in 0u64..10_000, n in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let a = complex_gaussian(n, n, &mut rng);
        prop_assert!(unitarity_residual(&polar_unitary(&a)) < 1e-10);
    }

    #[test]
    fn schaffer_lift_is_an_isometric_dilation(seed in 0u64..10_000, n in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let g = complex_gaussian(n, n, &mut rng);
        let a = &g * c(0.9 / spectral_norm(&g), 0.0);
        let lift = schaffer_lift(&a, 6, &TolerancePolicy::default()).unwrap();
        prop_assert!(lift.checks(&a).iter().all(|c| c.pass));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn coincidence_certificates_invert(seed in 0u64..10_000, kind in kind(), dim in 1usize..4) {
        let t = generate(kind, dim, 2, seed, TolerancePolicy::default()).unwrap();
        let mut rng = rng_from_seed(seed ^ 1);
        let a = characteristic_triple(&t).unwrap();
        let b = characteristic_triple(&t.conjugate(&random_unitary(dim, &mut rng))).unwrap();
        let result = coincide(&a, &b, seed).unwrap();
        prop_assert_eq!(&result.verdict, &Verdict::Coincide);
        let cert = result.certificate.unwrap();
        prop_assert!(certificate_residual(&b, &a, &cert.inverse()) <= 1e-6);
        let reflexive = coincide(&a, &a, seed).unwrap();
        prop_assert!(reflexive.residual < 1e-14);
    }
}
