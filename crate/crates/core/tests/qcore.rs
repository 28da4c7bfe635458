mod common;

use common::{random_density, random_pure};
use proptest::prelude::*;
use qdp_audit::circuit::{Angle, Axis, Gate};
use qdp_audit::qcore::{
    fidelity_pure, hermitian_eigenvalues, pure_to_density, pure_trace_distance, tensor_product,
    trace_distance, ComplexMatrix,
};
use qdp_audit::rng::stream;

fn dims() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(4), Just(8)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>(), dim in dims()) {
        let mut rng = stream(seed);
        let (a, b, c) = (random_density(dim, &mut rng), random_density(dim, &mut rng), random_density(dim, &mut rng));
        let ab = trace_distance(&a, &b).unwrap();
        let bc = trace_distance(&b, &c).unwrap();
        let ac = trace_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn eigenvalues_preserve_trace_invariants(seed in any::<u64>(), dim in dims()) {
        let mut rng = stream(seed);
        let rho = random_density(dim, &mut rng);
        let sigma = random_density(dim, &mut rng);
        let h = rho.matrix() - sigma.matrix();
        let eig = hermitian_eigenvalues(&h).unwrap();
        let sum: f64 = eig.iter().sum();
        let sum_sq: f64 = eig.iter().map(|l| l * l).sum();
        prop_assert!((sum - h.trace().re).abs() < 1e-10);
        prop_assert!((sum_sq - (&h * &h).trace().re).abs() < 1e-10);
        prop_assert!(eig.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn kron_trace_is_multiplicative(seed in any::<u64>()) {
        let mut rng = stream(seed);
        let a = random_density(2, &mut rng).into_matrix().scale(3.0);
        let b = random_density(4, &mut rng).into_matrix().scale(0.5);
        let k = tensor_product(&a, &b);
        prop_assert_eq!(k.rows(), 8);
        prop_assert!((k.trace() - a.trace() * b.trace()).norm() < 1e-12);
    }

    #[test]
    fn pure_and_density_distances_agree(seed in any::<u64>(), dim in dims()) {
        let mut rng = stream(seed);
        let (a, b) = (random_pure(dim, &mut rng), random_pure(dim, &mut rng));
        let pure = pure_trace_distance(&a, &b).unwrap();
        let dense = trace_distance(&pure_to_density(&a).unwrap(), &pure_to_density(&b).unwrap()).unwrap();
        prop_assert!((pure - dense).abs() < 1e-9);
        let f = fidelity_pure(&a, &b).unwrap();
        prop_assert!((pure - (1.0 - f * f).max(0.0).sqrt()).abs() < 1e-12);
        prop_assert!(pure_trace_distance(&a, &a.with_global_phase(1.3)).unwrap() < 1e-7);
    }

    #[test]
    fn gates_are_unitary(theta in -7.0f64..7.0, q in 0usize..3) {
        let gates = [
            Gate::Rot { axis: Axis::X, qubit: q, angle: Angle::Fixed(theta) },
            Gate::Rot { axis: Axis::Y, qubit: q, angle: Angle::Fixed(theta) },
            Gate::Rot { axis: Axis::Z, qubit: q, angle: Angle::Fixed(theta) },
            Gate::H(q),
            Gate::Cx { control: q, target: (q + 1) % 3 },
            Gate::Cz(q, (q + 2) % 3),
        ];
        for g in gates {
            let u = g.unitary(3, theta);
            let err = (&u * &u.adjoint()).distance(&ComplexMatrix::identity(8)).unwrap();
            prop_assert!(err < 1e-12, "{:?}: {}", g, err);
        }
    }
}
