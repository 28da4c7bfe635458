//! Canary records drawn to resemble the audited dataset.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Dataset, Record};
use crate::{Error, Result};

/// Per-feature mean and (population) standard deviation of a dataset.
pub fn feature_moments(dataset: &Dataset) -> Result<Vec<(f64, f64)>> {
    if dataset.is_empty() {
        return Err(Error::Empty("canaries need a nonempty dataset"));
    }
    let n = dataset.len() as f64;
    Ok((0..dataset.feature_count)
        .map(|j| {
            let mean = dataset.records.iter().map(|r| r.features[j]).sum::<f64>() / n;
            let var = dataset
                .records
                .iter()
                .map(|r| (r.features[j] - mean).powi(2))
                .sum::<f64>()
                / n;
            (mean, var.sqrt())
        })
        .collect())
}

/// `count` records with features from `N(μ̂ⱼ, σ̂ⱼ²)` clamped to `[0, 1]` and
/// uniform binary labels.
pub fn generate_canaries<R: Rng + ?Sized>(
    dataset: &Dataset,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Record>> {
    let moments = feature_moments(dataset)?;
    let normals: Vec<Option<Normal<f64>>> = moments
        .iter()
        .map(|&(mu, sd)| (sd > 0.0).then(|| Normal::new(mu, sd).expect("finite moments")))
        .collect();
    Ok((0..count)
        .map(|_| {
            let features = moments
                .iter()
                .zip(&normals)
                .map(|(&(mu, _), normal)| match normal {
                    Some(n) => n.sample(&mut *rng).clamp(0.0, 1.0),
                    None => mu,
                })
                .collect();
            Record {
                features,
                label: rng.random_range(0..2u8),
            }
        })
        .collect())
}
