//! Confidence bounds on the mean of per-trial statistics, and `ε̂`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-trial indicator rows: one row per trial, one column per canary.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialMatrix {
    /// Seen-canary indicators from the model trained with the offset encoding.
    pub x: Vec<Vec<bool>>,
    /// Unseen-canary indicators from the model trained without it.
    pub y: Vec<Vec<bool>>,
}

impl TrialMatrix {
    pub fn trials(&self) -> usize {
        self.x.len()
    }

    pub fn x_means(&self) -> Vec<f64> {
        row_means(&self.x)
    }

    pub fn y_means(&self) -> Vec<f64> {
        row_means(&self.y)
    }
}

pub fn row_means(rows: &[Vec<bool>]) -> Vec<f64> {
    rows.iter()
        .map(|r| r.iter().filter(|&&b| b).count() as f64 / r.len().max(1) as f64)
        .collect()
}

/// A one-sided confidence bound on the mean of i.i.d. statistics in `[0, 1]`.
pub trait MeanBound {
    /// Holds below the true mean with probability at least `1 - eta`.
    fn lower(&self, samples: &[f64], eta: f64) -> Result<f64>;
    /// Holds above the true mean with probability at least `1 - eta`.
    fn upper(&self, samples: &[f64], eta: f64) -> Result<f64>;
}

/// Empirical-Bernstein bound (Maurer & Pontil):
/// `p̂ ± (√(2·V̂·ln(2/η)/n) + 7·ln(2/η)/(3(n-1)))`, clamped to `[0, 1]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct EmpiricalBernstein;

impl EmpiricalBernstein {
    /// Half-width of the interval from sufficient statistics.
    pub fn deviation(n: usize, variance: f64, eta: f64) -> f64 {
        let log_term = (2.0 / eta).ln();
        let nf = n as f64;
        (2.0 * variance.max(0.0) * log_term / nf).sqrt() + 7.0 * log_term / (3.0 * (nf - 1.0))
    }
}

fn check(samples: &[f64], eta: f64) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::domain(format!(
            "confidence bounds need at least 2 trials, got {}",
            samples.len()
        )));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain(format!("confidence parameter {eta} must lie in (0, 1)")));
    }
    Ok(())
}

/// Sample mean and unbiased sample variance.
pub fn mean_and_variance(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

impl MeanBound for EmpiricalBernstein {
    fn lower(&self, samples: &[f64], eta: f64) -> Result<f64> {
        check(samples, eta)?;
        let (mean, var) = mean_and_variance(samples);
        Ok((mean - Self::deviation(samples.len(), var, eta)).clamp(0.0, 1.0))
    }

    fn upper(&self, samples: &[f64], eta: f64) -> Result<f64> {
        check(samples, eta)?;
        let (mean, var) = mean_and_variance(samples);
        Ok((mean + Self::deviation(samples.len(), var, eta)).clamp(0.0, 1.0))
    }
}

/// Lower bound on the mean per-trial indicator rate.
pub fn bound_lower(matrix: &[Vec<bool>], eta: f64) -> Result<f64> {
    EmpiricalBernstein.lower(&row_means(matrix), eta)
}

/// Upper bound on the mean per-trial indicator rate.
pub fn bound_upper(matrix: &[Vec<bool>], eta: f64) -> Result<f64> {
    EmpiricalBernstein.upper(&row_means(matrix), eta)
}

/// `max(0, ln((p1_lower - δ) / p0_upper))`.
pub fn epsilon_hat(p1_lower: f64, p0_upper: f64, delta: f64) -> f64 {
    let num = p1_lower - delta;
    if num <= 0.0 {
        return 0.0;
    }
    (num / p0_upper.max(f64::MIN_POSITIVE)).ln().max(0.0)
}
