use proptest::prelude::*;
use qdp_audit::audit::{
    audit, bound_lower, bound_upper, calibrate_kappa, coverage, epsilon_hat, mean_and_variance,
    row_means, run_trial, simulate_known_mechanism, theory_epsilon_measurement, AuditConfig,
    KnownMechanism,
};
use qdp_audit::data::iris_binary;
use qdp_audit::noise::NoiseSpec;
use qdp_audit::qml::{ModelSpec, Optimizer, TrainConfig};
use qdp_audit::rng::stream;

fn private_config(n: usize, k: usize) -> AuditConfig {
    let mut model = ModelSpec::new(4);
    model.noise = NoiseSpec::depolarizing(1.0);
    let train = TrainConfig { epochs: 20, learning_rate: 0.1, optimizer: Optimizer::GradientDescent, seed: 0 };
    AuditConfig::new(n, k, 0.1, 0.05, model, train)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bounds_bracket_the_sample_mean(
        rows in prop::collection::vec(prop::collection::vec(any::<bool>(), 1..8), 2..40),
        eta in 0.001f64..0.5,
    ) {
        let k = rows[0].len();
        let rows: Vec<Vec<bool>> = rows.into_iter().map(|mut r| { r.resize(k, false); r }).collect();
        let (mean, _) = mean_and_variance(&row_means(&rows));
        let lo = bound_lower(&rows, eta).unwrap();
        let hi = bound_upper(&rows, eta).unwrap();
        prop_assert!(lo <= mean + 1e-12 && mean <= hi + 1e-12);
        let e = epsilon_hat(lo, hi, 0.0);
        prop_assert!(e.is_finite() && e >= 0.0);
    }
}

#[test]
fn zero_epsilon_mechanism_is_rarely_overstated() {
    let mech = KnownMechanism::new(0.0, 0.3).unwrap();
    let s = coverage(&mech, 128, 8, 0.05, 500, 99).unwrap();
    assert!(s.violation_rate <= 0.07, "{}", s.violation_rate);
    assert_eq!(s.replication_seeds.len(), 500);
}

#[test]
fn estimate_grows_with_trials_with_shrinking_increments() {
    let mech = KnownMechanism::new(3f64.ln(), 0.3).unwrap();
    let mean_at = |n: usize| {
        (0..40)
            .map(|s| simulate_known_mechanism(&mech, n, 16, 0.05, &mut stream(s)).unwrap().epsilon_hat)
            .sum::<f64>()
            / 40.0
    };
    let e: Vec<f64> = [64, 256, 1024, 4096].iter().map(|&n| mean_at(n)).collect();
    assert!(e.windows(2).all(|w| w[1] >= w[0]), "{e:?}");
    assert!(e[3] - e[2] < e[1] - e[0], "{e:?}");
    assert!(e[3] <= 3f64.ln());
}

#[test]
fn fully_private_rows_share_a_common_mean() {
    let cfg = private_config(200, 4);
    let ds = iris_binary();
    let kappa = calibrate_kappa(&cfg, &ds).unwrap().kappa;
    let (mut x, mut y) = (0.0, 0.0);
    for i in 0..200 {
        let t = run_trial(i, &cfg, &ds, kappa).unwrap();
        x += t.x.iter().filter(|&&b| b).count() as f64 / 4.0;
        y += t.y.iter().filter(|&&b| b).count() as f64 / 4.0;
    }
    assert!((x - y).abs() / 200.0 < 0.05);
}

#[test]
fn fixed_kappa_at_the_constant_loss_still_reports_zero() {
    let mut cfg = private_config(16, 4);
    cfg.kappa = qdp_audit::audit::KappaRule::Fixed(2f64.ln() + 1e-9);
    let r = audit(&cfg, &iris_binary(), Some(1)).unwrap();
    // Every loss is ln 2, so both rates are 1 and the bounds cannot separate.
    assert_eq!(r.trial_means.seen, vec![1.0; 16]);
    assert_eq!(r.estimate.epsilon_hat, 0.0);
}

#[test]
fn report_config_reproduces_the_run() {
    let mut cfg = private_config(8, 2);
    cfg.model.noise = NoiseSpec::depolarizing(0.2);
    let first = audit(&cfg, &iris_binary(), Some(1)).unwrap();
    let json = serde_json::to_string(&first).unwrap();
    let embedded: AuditConfig =
        serde_json::from_value(serde_json::from_str::<serde_json::Value>(&json).unwrap()["config"].clone()).unwrap();
    let second = audit(&embedded, &iris_binary(), Some(1)).unwrap();
    assert_eq!(first.estimate, second.estimate);
    assert_eq!(first.trial_means, second.trial_means);
    assert_eq!(first.seeds, second.seeds);
}

#[test]
fn measurement_bound_matches_reference_values() {
    // Reference values from scipy (brentq on the δ equation, then the closed form).
    let cases = [
        ((10, 0.001, 1, 0.2, 1e-5), 0.06555953443267191, 0.5264633806698324),
        ((100, 1e-4, 8, 0.3, 1e-6), 0.10648170164590391, 0.2037895723648768),
        ((1, 0.05, 2, 0.1, 1e-3), 5.631928437947443, 0.9628404569995053),
    ];
    for ((n, d, r, mu, t), eps, c) in cases {
        let b = theory_epsilon_measurement(n, d, r, mu, t).unwrap();
        assert!((b.epsilon - eps).abs() < 1e-9, "{} vs {eps}", b.epsilon);
        assert!((b.c - c).abs() < 1e-9);
    }
}

/// Sweeping `N·d·r` across the domain: the closed form rises from 0, peaks,
/// then falls (and turns negative) as `N·d·r → 1 - μ`. It is not monotone.
#[test]
fn measurement_bound_is_not_monotone_in_ndr() {
    for (n, mu) in [(1u64, 0.2), (10, 0.45), (100, 0.2)] {
        let top = 1.0 - mu;
        let eps: Vec<f64> = (0..40)
            .map(|i| {
                let x = top * 0.99 * i as f64 / 39.0;
                theory_epsilon_measurement(n, x / n as f64, 1, mu, 1e-5).unwrap().epsilon
            })
            .collect();
        let rises = eps.windows(2).filter(|w| w[1] > w[0]).count();
        let falls = eps.windows(2).filter(|w| w[1] < w[0]).count();
        assert!(rises > 0 && falls > 0, "N = {n}, μ = {mu}: {eps:?}");
        assert!(eps[1] > eps[0] && *eps.last().unwrap() < 0.0);
    }
}
