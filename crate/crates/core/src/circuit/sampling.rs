use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::qcore::{DensityMatrix, Povm};
use crate::Result;

/// Number of successes in `shots` Bernoulli(`p`) draws.
pub fn sample_binary<R: Rng + ?Sized>(p: f64, shots: u64, rng: &mut R) -> u64 {
    let p = p.clamp(0.0, 1.0);
    Binomial::new(shots, p).expect("p in [0, 1]").sample(rng)
}

/// Multinomial outcome counts for measuring `povm` on `rho` `shots` times.
pub fn sample_counts<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    povm: &Povm,
    shots: u64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    let probs = povm.probabilities(rho)?;
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = 1.0;
    // Sequential conditional binomials.
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() || mass <= 0.0 {
            counts[i] = remaining;
            break;
        }
        let k = sample_binary((p / mass).min(1.0), remaining, rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{pure_to_density, PureState};
    use crate::rng::stream;

    #[test]
    fn basis_state_is_deterministic() {
        let rho = pure_to_density(&PureState::basis(1, 1)).unwrap();
        let povm = Povm::computational_basis(1);
        for shots in [1, 17, 1000] {
            assert_eq!(sample_counts(&rho, &povm, shots, &mut stream(3)).unwrap(), vec![0, shots]);
        }
    }

    #[test]
    fn seeded_repeat_is_identical() {
        let rho = DensityMatrix::maximally_mixed(4);
        let povm = Povm::computational_basis(2);
        let a = sample_counts(&rho, &povm, 5000, &mut stream(9)).unwrap();
        let b = sample_counts(&rho, &povm, 5000, &mut stream(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().sum::<u64>(), 5000);
    }

    #[test]
    fn mixed_state_frequencies_converge() {
        let rho = DensityMatrix::maximally_mixed(2);
        let povm = Povm::computational_basis(1);
        for (i, shots) in [100u64, 10_000, 1_000_000].into_iter().enumerate() {
            let counts = sample_counts(&rho, &povm, shots, &mut stream(40 + i as u64)).unwrap();
            let freq = counts[0] as f64 / shots as f64;
            assert!((freq - 0.5).abs() < 5.0 / (shots as f64).sqrt(), "shots {shots}: {freq}");
        }
    }

    #[test]
    fn dimension_checked() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(sample_counts(&rho, &Povm::computational_basis(1), 10, &mut stream(0)).is_err());
    }
}
