//! Closed-form privacy bounds of the noise mechanisms and the
//! sample-complexity estimate used to compare audit designs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::{Error, Result};

/// `ε = ln(1 + (1-p)·d·D/p)` for the depolarizing channel on a
/// `D`-dimensional space. `p = 0` gives `+∞` (no privacy).
pub fn theory_epsilon_depolarizing(p: f64, d: f64, dim: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("depolarizing probability p = {p} must lie in [0, 1]")));
    }
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::domain(format!("trace distance d = {d} must lie in (0, 1]")));
    }
    if dim < 2 {
        return Err(Error::domain(format!("Hilbert-space dimension D = {dim} must be at least 2")));
    }
    if p == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((1.0 + (1.0 - p) * d * dim as f64 / p).ln())
}

/// Privacy of `N`-shot measurement with projectors of rank at most `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBound {
    pub epsilon: f64,
    /// Tail cut-off solving the δ equation.
    pub c: f64,
    /// `√(μ(1-μ)/N)`.
    pub sigma: f64,
    /// `√(2π)·σ·erfc(c/(√2σ))` at the solved `c`.
    pub delta: f64,
}

fn delta_of_c(c: f64, sigma: f64) -> f64 {
    (2.0 * PI).sqrt() * sigma * erfc(c / (2f64.sqrt() * sigma))
}

/// `(ε, δ)` of the shot-noise mechanism at a target `δ`.
///
/// `c` is found by bisection on `[0, 20σ]` so that
/// `target_delta = √(2π)·σ·erfc(c/(√2σ))`; then
/// `ε = Ndr/(μ(1-μ)) · [(1-2μ-Ndr)c²/(2μ(1-μ-Ndr)) + c + Ndr/2]`.
pub fn theory_epsilon_measurement(
    shots: u64,
    d: f64,
    rank: usize,
    mu: f64,
    target_delta: f64,
) -> Result<MeasurementBound> {
    if shots == 0 {
        return Err(Error::domain("measurement count N must be at least 1"));
    }
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::domain(format!("distance d = {d} must lie in [0, 1]")));
    }
    if !(target_delta > 0.0 && target_delta < 1.0) {
        return Err(Error::domain(format!("target δ = {target_delta} must lie in (0, 1)")));
    }
    let ndr = shots as f64 * d * rank as f64;
    if !(mu > 0.0 && mu < 1.0 - ndr) {
        return Err(Error::domain(format!(
            "requires 0 < μ < 1 - N·d·r, but μ = {mu} and 1 - N·d·r = {} \
             (denominator μ(1 - μ - N·d·r) must be positive)",
            1.0 - ndr
        )));
    }
    let sigma = (mu * (1.0 - mu) / shots as f64).sqrt();
    let reachable = delta_of_c(0.0, sigma);
    if target_delta >= reachable {
        return Err(Error::domain(format!(
            "target δ = {target_delta} is not below δ(c = 0) = √(2π)·σ = {reachable}"
        )));
    }
    let (mut lo, mut hi) = (0.0, 20.0 * sigma);
    if delta_of_c(hi, sigma) > target_delta {
        return Err(Error::domain(format!(
            "target δ = {target_delta} is below δ(c = 20σ); no cut-off in range"
        )));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if delta_of_c(mid, sigma) > target_delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let epsilon = ndr / (mu * (1.0 - mu))
        * ((1.0 - 2.0 * mu - ndr) * c * c / (2.0 * mu * (1.0 - mu - ndr)) + c + ndr / 2.0);
    Ok(MeasurementBound {
        epsilon,
        c,
        sigma,
        delta: delta_of_c(c, sigma),
    })
}

/// Trials needed to separate rates `Δ` apart at failure probability `β`
/// with `K` tests per trial: `⌈ln(1/β)/(K·Δ²)⌉`. An order-of-magnitude
/// estimate, not a guarantee.
pub fn sample_complexity_estimate(delta_gap: f64, beta: f64, k: usize) -> Result<u64> {
    if !(delta_gap > 0.0 && delta_gap <= 1.0) {
        return Err(Error::domain(format!("gap Δ = {delta_gap} must lie in (0, 1]")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("β = {beta} must lie in (0, 1)")));
    }
    if k == 0 {
        return Err(Error::domain("K must be at least 1"));
    }
    let raw = (1.0 / beta).ln() / (k as f64 * delta_gap * delta_gap);
    Ok(raw.ceil().max(1.0) as u64)
}
