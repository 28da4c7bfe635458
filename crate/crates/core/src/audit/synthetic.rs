//! Synthetic mechanisms with a known privacy level, for checking that the
//! estimator pipeline never overstates `ε` more often than `β` allows.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::estimator::{epsilon_hat, EmpiricalBernstein, TrialMatrix};
use super::EpsilonEstimate;
use crate::rng::{derive_seed, stream, Purpose, Stream};
use crate::{Error, Result};

/// Indicator rates `p1 = min(1, e^ε·p0)` for seen canaries and `p0` for unseen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownMechanism {
    pub epsilon_true: f64,
    pub p0: f64,
}

impl KnownMechanism {
    pub fn new(epsilon_true: f64, p0: f64) -> Result<Self> {
        if !(epsilon_true >= 0.0 && epsilon_true.is_finite()) {
            return Err(Error::domain(format!("ε_true = {epsilon_true} must be finite and ≥ 0")));
        }
        if !(p0 > 0.0 && p0 <= 1.0) {
            return Err(Error::domain(format!("p0 = {p0} must lie in (0, 1]")));
        }
        Ok(Self { epsilon_true, p0 })
    }

    pub fn p1(&self) -> f64 {
        (self.epsilon_true.exp() * self.p0).min(1.0)
    }

    /// One trial: `k` seen and `k` unseen Bernoulli indicators.
    pub fn sample_trial<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> (Vec<bool>, Vec<bool>) {
        let p1 = self.p1();
        let x = (0..k).map(|_| rng.random_bool(p1)).collect();
        let y = (0..k).map(|_| rng.random_bool(self.p0)).collect();
        (x, y)
    }

    pub fn sample_matrix<R: Rng + ?Sized>(&self, n: usize, k: usize, rng: &mut R) -> TrialMatrix {
        let mut m = TrialMatrix::default();
        for _ in 0..n {
            let (x, y) = self.sample_trial(k, rng);
            m.x.push(x);
            m.y.push(y);
        }
        m
    }
}

/// Runs the estimator pipeline (`δ = 0`) on synthetic indicator matrices.
pub fn simulate_known_mechanism(
    mechanism: &KnownMechanism,
    n: usize,
    k: usize,
    beta: f64,
    rng: &mut Stream,
) -> Result<EpsilonEstimate> {
    if k == 0 {
        return Err(Error::domain("K must be at least 1"));
    }
    let m = mechanism.sample_matrix(n, k, rng);
    EpsilonEstimate::from_matrix(&m, beta, 0.0, Some(mechanism.epsilon_true))
}

/// Running statistics for the per-trial means of one side.
#[derive(Clone, Copy, Debug, Default)]
struct Running {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Running {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    fn variance(&self) -> f64 {
        if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        }
    }

    fn bounds(&self, eta: f64) -> (f64, f64) {
        let dev = EmpiricalBernstein::deviation(self.n, self.variance(), eta);
        ((self.mean - dev).clamp(0.0, 1.0), (self.mean + dev).clamp(0.0, 1.0))
    }
}

/// Number of trials until `ε̂ ≥ target`, or `max_trials` if never reached.
pub fn trials_to_target(
    mechanism: &KnownMechanism,
    k: usize,
    beta: f64,
    target: f64,
    max_trials: usize,
    rng: &mut Stream,
) -> usize {
    let (mut xs, mut ys) = (Running::default(), Running::default());
    for n in 1..=max_trials {
        let (x, y) = mechanism.sample_trial(k, rng);
        let rate = |v: &[bool]| v.iter().filter(|&&b| b).count() as f64 / k as f64;
        xs.push(rate(&x));
        ys.push(rate(&y));
        if n >= 2 {
            let p1 = xs.bounds(beta / 2.0).0;
            let p0 = ys.bounds(beta / 2.0).1;
            if epsilon_hat(p1, p0, 0.0) >= target {
                return n;
            }
        }
    }
    max_trials
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub mechanism: KnownMechanism,
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    pub replications: usize,
    /// Runs with `ε̂ > ε_true`.
    pub violations: usize,
    pub violation_rate: f64,
    pub mean_epsilon_hat: f64,
    pub master_seed: u64,
    pub replication_seeds: Vec<u64>,
    pub epsilon_hats: Vec<f64>,
}

/// Repeats [`simulate_known_mechanism`] with per-replication derived seeds.
pub fn coverage(
    mechanism: &KnownMechanism,
    n: usize,
    k: usize,
    beta: f64,
    replications: usize,
    master_seed: u64,
) -> Result<CoverageSummary> {
    let seeds: Vec<u64> = (0..replications as u64)
        .map(|r| derive_seed(master_seed, Purpose::Replication, r))
        .collect();
    let hats = seeds
        .iter()
        .map(|&s| Ok(simulate_known_mechanism(mechanism, n, k, beta, &mut stream(s))?.epsilon_hat))
        .collect::<Result<Vec<f64>>>()?;
    let violations = hats.iter().filter(|&&e| e > mechanism.epsilon_true).count();
    let reps = replications.max(1) as f64;
    Ok(CoverageSummary {
        mechanism: *mechanism,
        n,
        k,
        beta,
        replications,
        violations,
        violation_rate: if replications == 0 { 0.0 } else { violations as f64 / reps },
        mean_epsilon_hat: if replications == 0 { 0.0 } else { hats.iter().sum::<f64>() / reps },
        master_seed,
        replication_seeds: seeds,
        epsilon_hats: hats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::MeanBound;

    #[test]
    fn p1_is_capped() {
        assert_eq!(KnownMechanism::new(5.0, 0.5).unwrap().p1(), 1.0);
        assert!((KnownMechanism::new(3f64.ln(), 0.3).unwrap().p1() - 0.9).abs() < 1e-12);
        assert!(KnownMechanism::new(-1.0, 0.3).is_err());
    }

    #[test]
    fn zero_replications_is_empty() {
        let s = coverage(&KnownMechanism::new(0.0, 0.3).unwrap(), 64, 4, 0.05, 0, 1).unwrap();
        assert_eq!((s.violations, s.replication_seeds.len()), (0, 0));
    }

    #[test]
    fn running_bounds_match_batch_bounds() {
        let mech = KnownMechanism::new(0.5, 0.3).unwrap();
        let m = mech.sample_matrix(50, 4, &mut stream(2));
        let mut r = Running::default();
        for v in m.x_means() {
            r.push(v);
        }
        let (lo, hi) = r.bounds(0.025);
        assert!((lo - EmpiricalBernstein.lower(&m.x_means(), 0.025).unwrap()).abs() < 1e-12);
        assert!((hi - EmpiricalBernstein.upper(&m.x_means(), 0.025).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn known_mechanism_estimate_is_sound_on_average() {
        let mech = KnownMechanism::new(3f64.ln(), 0.3).unwrap();
        let mut total = 0.0;
        for s in 0..20 {
            let e = simulate_known_mechanism(&mech, 512, 16, 0.05, &mut stream(s)).unwrap();
            total += e.epsilon_hat;
        }
        let mean = total / 20.0;
        assert!(mean > 0.0 && mean <= 3f64.ln(), "{mean}");
    }
}
