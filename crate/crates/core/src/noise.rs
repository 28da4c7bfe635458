//! Depolarizing channels and the finite-shot measurement model.

use serde::{Deserialize, Serialize};

use crate::circuit::Gate;
use crate::qcore::{ComplexMatrix, DensityMatrix};
use crate::{Error, Result};

/// Where a depolarizing channel acts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Once per noise layer on the full register, `(1-p)ρ + p·I/D`.
    #[default]
    Global,
    /// On every qubit of the noise layer, `(1-p)ρ + (p/3)(XρX + YρY + ZρZ)`.
    PerQubit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    #[default]
    None,
    Depolarizing {
        p: f64,
        #[serde(default)]
        scope: Scope,
    },
    /// Expectation values are estimated from `shots` measurement samples.
    MeasurementShots { shots: u64 },
}

impl NoiseSpec {
    pub fn depolarizing(p: f64) -> Self {
        NoiseSpec::Depolarizing { p, scope: Scope::Global }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::None => Ok(()),
            NoiseSpec::Depolarizing { p, .. } => check_probability(p),
            NoiseSpec::MeasurementShots { shots } if shots == 0 => {
                Err(Error::domain("measurement noise needs at least one shot"))
            }
            NoiseSpec::MeasurementShots { .. } => Ok(()),
        }
    }

    /// Shot count when this spec describes measurement noise.
    pub fn shots(&self) -> Option<u64> {
        match *self {
            NoiseSpec::MeasurementShots { shots } => Some(shots),
            _ => None,
        }
    }

    pub fn depolarizing_p(&self) -> Option<f64> {
        match *self {
            NoiseSpec::Depolarizing { p, .. } => Some(p),
            _ => None,
        }
    }

    /// Applies the channel for one noise layer acting on `qubits`.
    pub(crate) fn apply_layer(&self, rho: DensityMatrix, qubits: &[usize]) -> Result<DensityMatrix> {
        match *self {
            NoiseSpec::Depolarizing { p, scope: Scope::Global } => depolarize_global(&rho, p),
            NoiseSpec::Depolarizing { p, scope: Scope::PerQubit } => {
                qubits.iter().try_fold(rho, |r, &q| depolarize_qubit(&r, q, p))
            }
            NoiseSpec::None | NoiseSpec::MeasurementShots { .. } => Ok(rho),
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability {p} is outside [0, 1]")));
    }
    Ok(())
}

/// `(1-p)ρ + p·I/D`.
pub fn depolarize_global(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    check_probability(p)?;
    let dim = rho.dim();
    let mixed = ComplexMatrix::identity(dim).scale(p / dim as f64);
    let out = &rho.matrix().scale(1.0 - p) + &mixed;
    Ok(DensityMatrix::from_channel_output(out))
}

/// `(1-p)ρ + (p/3)(XρX + YρY + ZρZ)` on one qubit.
pub fn depolarize_qubit(rho: &DensityMatrix, qubit: usize, p: f64) -> Result<DensityMatrix> {
    check_probability(p)?;
    let n = rho.qubits();
    if qubit >= n {
        return Err(Error::domain(format!("qubit {qubit} out of range for {n} qubits")));
    }
    let mut acc = rho.matrix().scale(1.0 - p);
    for pauli in [Gate::X(qubit), Gate::Y(qubit), Gate::Z(qubit)] {
        let u = pauli.unitary(n, 0.0);
        let conj = &(&u * rho.matrix()) * &u.adjoint();
        acc = &acc + &conj.scale(p / 3.0);
    }
    Ok(DensityMatrix::from_channel_output(acc))
}
