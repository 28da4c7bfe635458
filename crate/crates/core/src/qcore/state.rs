use super::eigen::hermitian_eigenvalues;
use super::matrix::{tensor_product, ComplexMatrix, C64};
use super::{HERMITIAN_TOL, NORM_TOL};
use crate::{Error, Result};

const NEG_EIGEN_TOL: f64 = 1e-10;

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Domain(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Normalized state vector. Qubit 0 is the most significant index bit.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amplitudes })
    }

    /// Wraps amplitudes produced by a norm-preserving computation.
    pub(crate) fn from_unitary_output(amplitudes: Vec<C64>) -> Self {
        debug_assert!(amplitudes.len().is_power_of_two());
        Self { amplitudes }
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis state `|index⟩` on `qubits` qubits.
    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << qubits];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn zero(qubits: usize) -> Self {
        Self::basis(qubits, 0)
    }

    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real(&[h, h]).expect("normalized")
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self { amplitudes }
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let w = C64::from_polar(1.0, phase);
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * w).collect(),
        }
    }
}

/// Tensor product of single-qubit pure states, kept factorized.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    factors: Vec<[C64; 2]>,
}

impl ProductState {
    pub fn new(factors: Vec<[C64; 2]>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Empty("product state needs at least one qubit"));
        }
        for f in &factors {
            let n = f[0].norm_sqr() + f[1].norm_sqr();
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized { norm_sq: n });
            }
        }
        Ok(Self { factors })
    }

    pub fn qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[[C64; 2]] {
        &self.factors
    }

    /// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of each factor.
    pub fn bloch_vectors(&self) -> Vec<[f64; 3]> {
        self.factors
            .iter()
            .map(|[a, b]| {
                let ab = a.conj() * b;
                [2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()]
            })
            .collect()
    }

    pub fn to_pure(&self) -> PureState {
        let mut amplitudes = vec![C64::new(1.0, 0.0)];
        for [a, b] in &self.factors {
            amplitudes = amplitudes.iter().flat_map(|x| [x * a, x * b]).collect();
        }
        PureState { amplitudes }
    }
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensity("matrix is not square".into()));
        }
        qubits_for_dim(matrix.rows())?;
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
        }
        let min = hermitian_eigenvalues(&matrix)?
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -NEG_EIGEN_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps the output of a trace- and positivity-preserving map.
    pub(crate) fn from_channel_output(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Eigenvalues with tiny negative values (≥ -1e-10) clamped to zero.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigenvalues(&self.matrix)?
            .into_iter()
            .map(|l| if l < 0.0 && l >= -NEG_EIGEN_TOL { 0.0 } else { l })
            .collect())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: tensor_product(&self.matrix, &other.matrix),
        }
    }

    /// Reduced state of a single qubit.
    pub fn qubit_marginal(&self, qubit: usize) -> Result<Self> {
        let n = self.qubits();
        if qubit >= n {
            return Err(Error::Domain(format!("qubit {qubit} out of range for {n} qubits")));
        }
        let bit = 1usize << (n - 1 - qubit);
        let mut out = ComplexMatrix::zeros(2, 2);
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                if (r & !bit) != (c & !bit) {
                    continue;
                }
                let (a, b) = (usize::from(r & bit != 0), usize::from(c & bit != 0));
                out.set(a, b, out.get(a, b) + self.matrix.get(r, c));
            }
        }
        Ok(Self { matrix: out })
    }
}

impl From<&PureState> for DensityMatrix {
    fn from(psi: &PureState) -> Self {
        Self {
            matrix: ComplexMatrix::outer(&psi.amplitudes, &psi.amplitudes),
        }
    }
}

/// Measurement described by positive operators summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    operators: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidPovm("no operators".into()))?;
        let dim = first.rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, m) in operators.iter().enumerate() {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::InvalidPovm(format!("operator {i} has the wrong shape")));
            }
            if !m.is_hermitian(HERMITIAN_TOL) {
                return Err(Error::InvalidPovm(format!("operator {i} is not Hermitian")));
            }
            let min = hermitian_eigenvalues(m)?.last().copied().unwrap_or(0.0);
            if min < -NEG_EIGEN_TOL {
                return Err(Error::InvalidPovm(format!(
                    "operator {i} is not positive semidefinite (eigenvalue {min:e})"
                )));
            }
            sum = &sum + m;
        }
        let gap = sum.distance(&ComplexMatrix::identity(dim))?;
        if gap > NORM_TOL {
            return Err(Error::InvalidPovm(format!(
                "operators sum to identity only within {gap:e}"
            )));
        }
        Ok(Self { operators })
    }

    /// Projective measurement in the computational basis.
    pub fn computational_basis(qubits: usize) -> Self {
        let dim = 1 << qubits;
        let operators = (0..dim)
            .map(|i| {
                let mut d = vec![0.0; dim];
                d[i] = 1.0;
                ComplexMatrix::diag(&d)
            })
            .collect();
        Self { operators }
    }

    /// Two-outcome Z measurement of one qubit: outcome 0 is `|0⟩`, outcome 1 is `|1⟩`.
    pub fn single_qubit_z(qubits: usize, qubit: usize) -> Self {
        let dim = 1usize << qubits;
        let bit = 1usize << (qubits - 1 - qubit);
        let zero: Vec<f64> = (0..dim).map(|i| if i & bit == 0 { 1.0 } else { 0.0 }).collect();
        let one: Vec<f64> = zero.iter().map(|v| 1.0 - v).collect();
        Self {
            operators: vec![ComplexMatrix::diag(&zero), ComplexMatrix::diag(&one)],
        }
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// Outcome probabilities `Tr(Mᵢ ρ)`, clamped to `[0, 1]` and renormalized.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: rho.dim(),
            });
        }
        let raw: Vec<f64> = self
            .operators
            .iter()
            .map(|m| trace_of_product(m, rho.matrix()).re.clamp(0.0, 1.0))
            .collect();
        let total: f64 = raw.iter().sum();
        Ok(raw.into_iter().map(|p| p / total).collect())
    }
}

/// `Tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.rows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a.get(i, k) * b.get(k, i);
        }
    }
    acc
}

/// `½‖ρ - σ‖₁`, from the eigenvalues of the difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    let diff = rho.matrix.try_sub(&sigma.matrix)?;
    let eig = hermitian_eigenvalues(&diff)?;
    Ok((0.5 * eig.iter().map(|l| l.abs()).sum::<f64>()).clamp(0.0, 1.0))
}

/// `√(1 - |⟨a|b⟩|²)`.
pub fn pure_trace_distance(a: &PureState, b: &PureState) -> Result<f64> {
    let overlap = a.inner(b)?.norm_sqr();
    Ok((1.0 - overlap).max(0.0).sqrt())
}

pub fn pure_to_density(psi: &PureState) -> Result<DensityMatrix> {
    let norm_sq = psi.norm_sqr();
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(DensityMatrix::from(psi))
}

/// `|⟨a|b⟩|`.
pub fn fidelity_pure(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0))
}
