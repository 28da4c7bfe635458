//! Browser bindings for a few `qdp-audit` operations.
//!
//! Each export takes plain numbers and returns a JSON string for the page
//! script to render. The `*_json` functions hold the logic and are usable
//! (and tested) natively; the exported wrappers only convert errors.

use qdp_audit::audit::{coverage, theory_epsilon_depolarizing, KnownMechanism};
use qdp_audit::circuit::Axis;
use qdp_audit::encoding::{sample_offsets, CanaryPair, OffsetSpec, DEFAULT_DELTA_CONF};
use qdp_audit::rng::stream;
use serde_json::json;
use wasm_bindgen::prelude::*;

type Result<T> = std::result::Result<T, String>;

fn err(e: qdp_audit::Error) -> String {
    e.to_string()
}

/// `ε(p)` of the global depolarizing channel for `points` values of `p` on
/// `(0, 1]`, at threshold `d` on `qubits` qubits.
pub fn depolarizing_curve_json(d: f64, qubits: u32, points: u32) -> Result<String> {
    if !(1..=16).contains(&qubits) {
        return Err(format!("qubits = {qubits} must be in 1..=16"));
    }
    if points < 2 {
        return Err("need at least 2 points".into());
    }
    let dim = 1usize << qubits;
    let curve = (1..=points)
        .map(|i| {
            let p = i as f64 / points as f64;
            theory_epsilon_depolarizing(p, d, dim).map(|e| json!({ "p": p, "epsilon": e }))
        })
        .collect::<qdp_audit::Result<Vec<_>>>()
        .map_err(err)?;
    Ok(json!({ "d": d, "dim": dim, "curve": curve }).to_string())
}

/// One canary pair: offsets drawn at the widest admissible spread for `d`,
/// with per-qubit and full-state trace distances.
pub fn canary_pair_json(features: &[f64], d: f64, seed: u64) -> Result<String> {
    if features.is_empty() || features.len() > 12 {
        return Err("give between 1 and 12 features".into());
    }
    let spec = OffsetSpec::at_bounds(d, DEFAULT_DELTA_CONF).map_err(err)?;
    let offsets = sample_offsets(&spec, features.len(), &mut stream(seed));
    let features: Vec<f64> = features.iter().map(|x| x.clamp(0.0, 1.0)).collect();
    let pair = CanaryPair::new(features, 1, offsets, Axis::Y).map_err(err)?;
    Ok(json!({
        "features": pair.features,
        "offsets": pair.offsets,
        "sigma": spec.sigma,
        "gamma": spec.gamma,
        "per_qubit_distance": pair.per_qubit_distance,
        "full_distance": pair.full_distance,
        "bloch_phi1": pair.state_phi1.bloch_vectors(),
        "bloch_phi2": pair.state_phi2.bloch_vectors(),
    })
    .to_string())
}

/// Estimator coverage on a mechanism with known `ε`.
pub fn coverage_json(
    epsilon: f64,
    p0: f64,
    n: u32,
    k: u32,
    beta: f64,
    reps: u32,
    seed: u64,
) -> Result<String> {
    if reps > 5000 || n as u64 * k as u64 * reps as u64 > 50_000_000 {
        return Err("that run is too large for the browser; lower n, K or the replication count".into());
    }
    let mech = KnownMechanism::new(epsilon, p0).map_err(err)?;
    let summary = coverage(&mech, n as usize, k as usize, beta, reps as usize, seed).map_err(err)?;
    serde_json::to_string(&summary).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn depolarizing_curve(d: f64, qubits: u32, points: u32) -> std::result::Result<String, JsError> {
    depolarizing_curve_json(d, qubits, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn canary_pair(features: Vec<f64>, d: f64, seed: u64) -> std::result::Result<String, JsError> {
    canary_pair_json(&features, d, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn coverage_run(
    epsilon: f64,
    p0: f64,
    n: u32,
    k: u32,
    beta: f64,
    reps: u32,
    seed: u64,
) -> std::result::Result<String, JsError> {
    coverage_json(epsilon, p0, n, k, beta, reps, seed).map_err(|e| JsError::new(&e))
}
