//! Angle encoding of classical features and offset-encoded canary pairs.
//!
//! A feature `c ∈ [0, 1]` becomes `R(πc)|0⟩`; its canary twin is
//! `R(πc + α)|0⟩`. For a single qubit the two states sit at trace distance
//! `|sin(α/2)|`, so bounding `|α|` bounds adjacency. Gaussian offsets with the
//! standard deviation from [`sigma_bound`] stay adjacent with probability
//! `1 - delta_conf`; clipping at [`gamma_bound`] makes it certain.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};

use crate::circuit::Axis;
use crate::qcore::{pure_trace_distance, ProductState, PureState, C64};
use crate::{Error, Result};

pub const DEFAULT_DELTA_CONF: f64 = 0.01;

fn rotated_zero(axis: Axis, theta: f64) -> [C64; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    match axis {
        Axis::Y => [C64::new(c, 0.0), C64::new(s, 0.0)],
        Axis::X => [C64::new(c, 0.0), C64::new(0.0, -s)],
        Axis::Z => [C64::from_polar(1.0, -theta / 2.0), C64::new(0.0, 0.0)],
    }
}

/// `⊗ⱼ R(θⱼ)|0⟩` for explicit rotation angles.
pub fn encode_angles(angles: &[f64], axis: Axis) -> Result<ProductState> {
    if angles.is_empty() {
        return Err(Error::Empty("feature vector"));
    }
    if axis == Axis::Z {
        return Err(Error::domain("RZ on |0⟩ only adds a phase; encode with RY or RX"));
    }
    ProductState::new(angles.iter().map(|&t| rotated_zero(axis, t)).collect())
}

/// Angles `πxⱼ`, with features clamped to `[0, 1]`.
pub fn feature_angles(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| PI * v.clamp(0.0, 1.0)).collect()
}

/// Angles `πcⱼ + αⱼ`.
pub fn offset_angles(c: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
    if c.len() != alpha.len() {
        return Err(Error::DimensionMismatch {
            expected: c.len(),
            actual: alpha.len(),
        });
    }
    Ok(feature_angles(c).iter().zip(alpha).map(|(t, a)| t + a).collect())
}

/// `⊗ⱼ RY(πxⱼ)|0⟩`.
pub fn angle_encode(x: &[f64]) -> Result<PureState> {
    Ok(encode_angles(&feature_angles(x), Axis::Y)?.to_pure())
}

/// `⊗ⱼ RY(πcⱼ + αⱼ)|0⟩`.
pub fn angle_encode_offset(c: &[f64], alpha: &[f64]) -> Result<PureState> {
    Ok(encode_angles(&offset_angles(c, alpha)?, Axis::Y)?.to_pure())
}

fn check_threshold(d: f64) -> Result<()> {
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::domain(format!("trace-distance threshold d = {d} must lie in (0, 1]")));
    }
    Ok(())
}

/// Largest Gaussian standard deviation keeping `|sin(α/2)| < d` with
/// probability `1 - delta_conf`: `2·arcsin(d) / Φ⁻¹(1 - delta_conf/2)`.
pub fn sigma_bound(d: f64, delta_conf: f64) -> Result<f64> {
    check_threshold(d)?;
    if !(delta_conf > 0.0 && delta_conf < 1.0) {
        return Err(Error::domain(format!("delta_conf = {delta_conf} must lie in (0, 1)")));
    }
    let z = StdNormal::standard().inverse_cdf(1.0 - delta_conf / 2.0);
    Ok(2.0 * d.asin() / z)
}

/// Clip bound `2·arcsin(d)`: `|α| ≤ γ` implies `|sin(α/2)| ≤ d`.
pub fn gamma_bound(d: f64) -> Result<f64> {
    check_threshold(d)?;
    Ok(2.0 * d.asin())
}

/// Offset distribution for canary construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetSpec {
    pub d: f64,
    pub delta_conf: f64,
    pub sigma: f64,
    pub gamma: f64,
}

impl OffsetSpec {
    /// The widest admissible spec for threshold `d`: `σ` and `γ` at their bounds.
    pub fn at_bounds(d: f64, delta_conf: f64) -> Result<Self> {
        Ok(Self {
            d,
            delta_conf,
            sigma: sigma_bound(d, delta_conf)?,
            gamma: gamma_bound(d)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let sigma_max = sigma_bound(self.d, self.delta_conf)?;
        let gamma_max = gamma_bound(self.d)?;
        if !(self.sigma >= 0.0 && self.sigma <= sigma_max + 1e-12) {
            return Err(Error::domain(format!(
                "sigma = {} exceeds the bound {sigma_max} for d = {}",
                self.sigma, self.d
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma <= gamma_max + 1e-12) {
            return Err(Error::domain(format!(
                "gamma = {} exceeds the bound {gamma_max} for d = {}",
                self.gamma, self.d
            )));
        }
        Ok(())
    }
}

/// `m` i.i.d. draws from `N(0, σ²)`, each clipped to `[-γ, γ]`.
pub fn sample_offsets<R: Rng + ?Sized>(spec: &OffsetSpec, m: usize, rng: &mut R) -> Vec<f64> {
    if spec.sigma == 0.0 {
        return vec![0.0; m];
    }
    let normal = Normal::new(0.0, spec.sigma).expect("finite sigma");
    (0..m)
        .map(|_| normal.sample(rng).clamp(-spec.gamma, spec.gamma))
        .collect()
}

/// Per-qubit distances `|sin(αⱼ/2)|` and the full product-state distance
/// `√(1 - ∏ⱼ cos²(αⱼ/2))`.
pub fn pair_distances(c: &[f64], alpha: &[f64]) -> Result<(Vec<f64>, f64)> {
    if c.len() != alpha.len() {
        return Err(Error::DimensionMismatch {
            expected: c.len(),
            actual: alpha.len(),
        });
    }
    let per_qubit: Vec<f64> = alpha.iter().map(|a| (a / 2.0).sin().abs()).collect();
    let overlap: f64 = alpha.iter().map(|a| (a / 2.0).cos().powi(2)).product();
    Ok((per_qubit, (1.0 - overlap).max(0.0).sqrt()))
}

/// One canary record with both of its encodings.
#[derive(Clone, Debug)]
pub struct CanaryPair {
    pub features: Vec<f64>,
    pub label: u8,
    pub offsets: Vec<f64>,
    pub state_phi1: ProductState,
    pub state_phi2: ProductState,
    pub per_qubit_distance: Vec<f64>,
    pub full_distance: f64,
}

impl CanaryPair {
    pub fn new(features: Vec<f64>, label: u8, offsets: Vec<f64>, axis: Axis) -> Result<Self> {
        let state_phi1 = encode_angles(&feature_angles(&features), axis)?;
        let state_phi2 = encode_angles(&offset_angles(&features, &offsets)?, axis)?;
        let (per_qubit_distance, full_distance) = pair_distances(&features, &offsets)?;
        Ok(Self {
            features,
            label,
            offsets,
            state_phi1,
            state_phi2,
            per_qubit_distance,
            full_distance,
        })
    }

    pub fn max_qubit_distance(&self) -> f64 {
        self.per_qubit_distance.iter().copied().fold(0.0, f64::max)
    }

    /// Full-state distance recomputed from the encoded states.
    pub fn verify_full_distance(&self) -> Result<f64> {
        pure_trace_distance(&self.state_phi1.to_pure(), &self.state_phi2.to_pure())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3};

    fn amps(psi: &PureState) -> Vec<f64> {
        psi.amplitudes().iter().map(|a| a.re).collect()
    }

    #[test]
    fn angle_encode_examples() {
        assert_eq!(amps(&angle_encode(&[0.0]).unwrap()), vec![1.0, 0.0]);
        let one = angle_encode(&[1.0]).unwrap();
        assert!(one.amplitudes()[0].norm() < 1e-15 && (one.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
        let half = amps(&angle_encode(&[0.5]).unwrap());
        assert!((half[0] - FRAC_1_SQRT_2).abs() < 1e-15 && (half[1] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(angle_encode(&[]).is_err());
    }

    #[test]
    fn features_are_clamped() {
        assert_eq!(angle_encode(&[-0.3]).unwrap(), angle_encode(&[0.0]).unwrap());
        assert_eq!(angle_encode(&[1.7]).unwrap(), angle_encode(&[1.0]).unwrap());
    }

    #[test]
    fn offset_encode_examples() {
        let c = [0.3, 0.7];
        assert_eq!(angle_encode_offset(&c, &[0.0, 0.0]).unwrap(), angle_encode(&c).unwrap());
        let d = pure_trace_distance(
            &angle_encode_offset(&[0.0], &[FRAC_PI_3]).unwrap(),
            &angle_encode(&[0.0]).unwrap(),
        )
        .unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        let product = angle_encode(&[0.3]).unwrap().tensor(&angle_encode(&[0.7]).unwrap());
        assert_eq!(angle_encode_offset(&c, &[0.0, 0.0]).unwrap(), product);
        assert!(angle_encode_offset(&c, &[0.0]).is_err());
    }

    #[test]
    fn sigma_bound_examples() {
        // Φ⁻¹(0.995) = 2.5758…; the rounded constant 2.576 agrees to ~1e-4.
        assert!((sigma_bound(1.0, 0.01).unwrap() - PI / 2.576).abs() < 1e-4);
        assert!((sigma_bound(0.1, 0.01).unwrap() - 2.0 * 0.100167 / 2.576).abs() < 1e-5);
        assert!(sigma_bound(0.0, 0.01).is_err());
        assert!(sigma_bound(1.2, 0.01).is_err());
        assert!(sigma_bound(0.5, 0.0).is_err());
    }

    #[test]
    fn gamma_bound_examples() {
        assert!((gamma_bound(1.0).unwrap() - PI).abs() < 1e-15);
        assert!((gamma_bound(0.1).unwrap() - 0.200335).abs() < 1e-6);
        assert!(gamma_bound(-0.1).is_err());
        let d = 0.1;
        let g = gamma_bound(d).unwrap();
        for i in 0..=1000 {
            let a = -g + 2.0 * g * i as f64 / 1000.0;
            assert!((a / 2.0).sin().abs() <= d + 1e-15);
        }
    }

    #[test]
    fn offsets_respect_clip() {
        let spec = OffsetSpec::at_bounds(0.1, 0.01).unwrap();
        let alpha = sample_offsets(&spec, 10_000, &mut stream(5));
        assert!(alpha.iter().all(|a| a.abs() <= spec.gamma));
        assert!(alpha.iter().all(|a| (a / 2.0).sin().abs() <= spec.d));
        let zero = OffsetSpec { sigma: 0.0, ..spec };
        assert_eq!(sample_offsets(&zero, 4, &mut stream(5)), vec![0.0; 4]);
    }

    #[test]
    fn offset_spec_validation() {
        let spec = OffsetSpec::at_bounds(0.2, 0.01).unwrap();
        assert!(spec.validate().is_ok());
        assert!(OffsetSpec { sigma: spec.sigma * 1.01, ..spec }.validate().is_err());
        assert!(OffsetSpec { gamma: spec.gamma * 1.01, ..spec }.validate().is_err());
    }

    #[test]
    fn pair_distance_examples() {
        let (per, full) = pair_distances(&[0.1, 0.2, 0.3], &[0.0; 3]).unwrap();
        assert_eq!((per, full), (vec![0.0; 3], 0.0));
        let (per, full) = pair_distances(&[0.4], &[FRAC_PI_3]).unwrap();
        assert!((per[0] - 0.5).abs() < 1e-15 && (full - 0.5).abs() < 1e-15);
        let (_, full) = pair_distances(&[0.4, 0.9], &[FRAC_PI_3, FRAC_PI_3]).unwrap();
        assert!((full - (1.0f64 - 0.5625).sqrt()).abs() < 1e-12);
        assert!((full - 0.66144).abs() < 1e-5);
    }

    #[test]
    fn canary_pair_is_consistent() {
        let pair = CanaryPair::new(vec![0.2, 0.8, 0.5], 1, vec![0.05, -0.1, 0.2], Axis::Y).unwrap();
        assert!((pair.verify_full_distance().unwrap() - pair.full_distance).abs() < 1e-10);
        assert!((pair.max_qubit_distance() - 0.1f64.sin()).abs() < 1e-15);
        let rx = CanaryPair::new(vec![0.2, 0.8], 0, vec![0.05, -0.1], Axis::X).unwrap();
        assert!((rx.verify_full_distance().unwrap() - rx.full_distance).abs() < 1e-10);
    }
}
