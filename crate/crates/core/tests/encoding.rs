use proptest::prelude::*;
use qdp_audit::circuit::Axis;
use qdp_audit::encoding::{
    angle_encode, angle_encode_offset, gamma_bound, pair_distances, sample_offsets, sigma_bound,
    CanaryPair, OffsetSpec,
};
use qdp_audit::qcore::pure_trace_distance;
use qdp_audit::rng::stream;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn closed_form_distances_match_states(
        c in prop::collection::vec(0.0f64..=1.0, 1..6),
        seed in any::<u64>(),
        d in 0.01f64..0.5,
    ) {
        let spec = OffsetSpec::at_bounds(d, 0.01).unwrap();
        let alpha = sample_offsets(&spec, c.len(), &mut stream(seed));
        let (per_qubit, full) = pair_distances(&c, &alpha).unwrap();
        let states = (angle_encode(&c).unwrap(), angle_encode_offset(&c, &alpha).unwrap());
        prop_assert!((full - pure_trace_distance(&states.0, &states.1).unwrap()).abs() < 1e-7);
        prop_assert!(per_qubit.iter().all(|&t| t <= d));
        for (j, &cj) in c.iter().enumerate() {
            let single = (angle_encode(&[cj]).unwrap(), angle_encode_offset(&[cj], &alpha[j..=j]).unwrap());
            prop_assert!((per_qubit[j] - pure_trace_distance(&single.0, &single.1).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn canary_pairs_are_adjacent_per_qubit(
        c in prop::collection::vec(0.0f64..=1.0, 1..6),
        seed in any::<u64>(),
        x_axis in any::<bool>(),
    ) {
        let axis = if x_axis { Axis::X } else { Axis::Y };
        let spec = OffsetSpec::at_bounds(0.1, 0.01).unwrap();
        let alpha = sample_offsets(&spec, c.len(), &mut stream(seed));
        let pair = CanaryPair::new(c, 1, alpha, axis).unwrap();
        prop_assert!(pair.max_qubit_distance() <= 0.1);
        prop_assert!((pair.verify_full_distance().unwrap() - pair.full_distance).abs() < 1e-7);
    }
}

#[test]
fn bounds_at_the_reference_threshold() {
    assert!((sigma_bound(0.1, 0.01).unwrap() - 0.07777).abs() < 1e-4);
    assert!((gamma_bound(0.1).unwrap() - 0.200335).abs() < 1e-6);
    assert!(sigma_bound(0.0, 0.01).is_err());
    assert!(sigma_bound(0.1, 1.0).is_err());
}

#[test]
fn unclipped_offsets_stay_adjacent_with_the_stated_probability() {
    let d = 0.1;
    let spec = OffsetSpec { d, delta_conf: 0.01, sigma: sigma_bound(d, 0.01).unwrap(), gamma: f64::INFINITY };
    let draws = sample_offsets(&spec, 100_000, &mut stream(17));
    let inside = draws.iter().filter(|a| (*a / 2.0).sin().abs() < d).count() as f64 / 1e5;
    // Binomial(1e5, 0.99) has standard deviation 3.1e-4.
    assert!((inside - 0.99).abs() < 0.002, "{inside}");
}
