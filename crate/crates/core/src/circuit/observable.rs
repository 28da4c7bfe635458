use super::pauli::PauliOperator;
use crate::qcore::{ComplexMatrix, DensityMatrix, HERMITIAN_TOL};
use crate::{Error, Result};

/// Hermitian readout operator on the full register.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        if !matrix.rows().is_power_of_two() {
            return Err(Error::domain("observable dimension must be a power of two"));
        }
        Ok(Self { matrix })
    }

    /// Pauli `Z` on `qubit` of a `qubits`-qubit register.
    pub fn z(qubits: usize, qubit: usize) -> Self {
        Self {
            matrix: PauliOperator::z(qubits, qubit).to_matrix(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn to_pauli(&self) -> PauliOperator {
        PauliOperator::from_matrix(&self.matrix).expect("validated Hermitian")
    }
}

/// `Tr(O ρ)`.
pub fn expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            actual: rho.dim(),
        });
    }
    let tr = crate::qcore::state_trace_of_product(obs.matrix(), rho.matrix());
    debug_assert!(tr.im.abs() < 1e-9, "imaginary residue {}", tr.im);
    Ok(tr.re)
}
