use qdp_audit_demo::{canary_pair_json, coverage_json, depolarizing_curve_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn curve_ends_at_zero_and_decreases() {
    let v = parse(depolarizing_curve_json(1.0, 1, 4).unwrap());
    let eps: Vec<f64> = v["curve"].as_array().unwrap().iter().map(|p| p["epsilon"].as_f64().unwrap()).collect();
    assert_eq!(eps.len(), 4);
    assert_eq!(*eps.last().unwrap(), 0.0);
    assert!(eps.windows(2).all(|w| w[1] < w[0]));
    // p = 0.5, d = 1, D = 2 gives ln 3.
    assert!((eps[1] - 3f64.ln()).abs() < 1e-12);
}

#[test]
fn canary_pair_respects_threshold() {
    let v = parse(canary_pair_json(&[0.2, 0.5, 0.9, 1.4], 0.1, 3).unwrap());
    assert_eq!(v["features"][3], 1.0);
    for t in v["per_qubit_distance"].as_array().unwrap() {
        assert!(t.as_f64().unwrap() <= 0.1);
    }
    assert!(canary_pair_json(&[], 0.1, 3).is_err());
    assert!(canary_pair_json(&[0.5], 1.5, 3).is_err());
}

#[test]
fn coverage_is_reproducible() {
    let a = coverage_json(0.0, 0.3, 64, 4, 0.05, 20, 1).unwrap();
    assert_eq!(a, coverage_json(0.0, 0.3, 64, 4, 0.05, 20, 1).unwrap());
    assert_eq!(parse(a)["replications"], 20);
    assert!(coverage_json(0.0, 0.3, 100_000, 100, 0.05, 5000, 1).is_err());
}
