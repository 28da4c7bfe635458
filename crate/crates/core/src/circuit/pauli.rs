use std::sync::OnceLock;

use super::gate::{Axis, Gate};
use crate::noise::{NoiseSpec, Scope};
use crate::qcore::{ComplexMatrix, DensityMatrix, C64};
use crate::{Error, Result};

// Single-qubit Pauli codes.
const I: usize = 0;
const X: usize = 1;
const Y: usize = 2;
const Z: usize = 3;

/// Hermitian operator in the Pauli basis: `O = Σ_P c_P P`.
///
/// A Pauli string is indexed base 4 with qubit 0 as the most significant
/// digit, codes `I=0, X=1, Y=2, Z=3`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliOperator {
    qubits: usize,
    coeffs: Vec<f64>,
}

/// `(row, col, value)` of the single-qubit Pauli `code`: `P|col⟩ = value |row⟩`.
fn pauli_entry(code: usize, col_bit: usize) -> (usize, C64) {
    let (re, im) = match (code, col_bit) {
        (I, b) => return (b, C64::new(1.0, 0.0)),
        (X, b) => return (b ^ 1, C64::new(1.0, 0.0)),
        (Y, 0) => (0.0, 1.0),
        (Y, _) => (0.0, -1.0),
        (Z, 0) => (1.0, 0.0),
        (Z, _) => (-1.0, 0.0),
        _ => unreachable!(),
    };
    let row = if code == Y { col_bit ^ 1 } else { col_bit };
    (row, C64::new(re, im))
}

impl PauliOperator {
    pub fn zero(qubits: usize) -> Self {
        Self {
            qubits,
            coeffs: vec![0.0; 1 << (2 * qubits)],
        }
    }

    /// `Z` on one qubit.
    pub fn z(qubits: usize, qubit: usize) -> Self {
        let mut op = Self::zero(qubits);
        op.coeffs[Z << (2 * (qubits - 1 - qubit))] = 1.0;
        op
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn digit(&self, index: usize, q: usize) -> usize {
        (index >> (2 * (self.qubits - 1 - q))) & 3
    }

    /// Decomposes a Hermitian matrix: `c_P = Tr(P M) / D`.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        let dim = m.rows();
        if !m.is_square() || !dim.is_power_of_two() {
            return Err(Error::domain("Pauli decomposition needs a 2^n x 2^n matrix"));
        }
        let deviation = m.hermitian_deviation();
        if deviation > 1e-12 {
            return Err(Error::NotHermitian { deviation });
        }
        let qubits = dim.trailing_zeros() as usize;
        let mut op = Self::zero(qubits);
        for index in 0..op.coeffs.len() {
            let mut tr = C64::new(0.0, 0.0);
            for col in 0..dim {
                let (row, val) = op.string_entry(index, col);
                tr += val * m.get(col, row);
            }
            op.coeffs[index] = tr.re / dim as f64;
        }
        Ok(op)
    }

    /// `(row, value)` with `P|col⟩ = value |row⟩` for the Pauli string `index`.
    fn string_entry(&self, index: usize, col: usize) -> (usize, C64) {
        let mut row = 0;
        let mut val = C64::new(1.0, 0.0);
        for q in 0..self.qubits {
            let shift = self.qubits - 1 - q;
            let (r, v) = pauli_entry(self.digit(index, q), (col >> shift) & 1);
            row |= r << shift;
            val *= v;
        }
        (row, val)
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let dim = 1usize << self.qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (index, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for col in 0..dim {
                let (row, val) = self.string_entry(index, col);
                m.set(row, col, m.get(row, col) + val * c);
            }
        }
        m
    }

    /// `Tr(O ρ)`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != 1 << self.qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.qubits,
                actual: rho.dim(),
            });
        }
        let mut acc = 0.0;
        for (index, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut tr = C64::new(0.0, 0.0);
            for col in 0..rho.dim() {
                let (row, val) = self.string_entry(index, col);
                tr += val * rho.matrix().get(col, row);
            }
            acc += c * tr.re;
        }
        Ok(acc)
    }

    /// `Tr(P ρ)` for every Pauli string `P`, given a product state's Bloch
    /// vectors; dotting with [`coeffs`](Self::coeffs) yields `Tr(O ρ)`.
    pub fn product_features(bloch: &[[f64; 3]]) -> Vec<f64> {
        let mut out = vec![1.0];
        for b in bloch {
            let local = [1.0, b[0], b[1], b[2]];
            out = out.iter().flat_map(|&x| local.map(|l| x * l)).collect();
        }
        out
    }

    /// `Tr(O ρ)` for a product state given by Bloch vectors, contracting one
    /// qubit at a time without materializing the product features.
    pub fn product_expectation(&self, bloch: &[[f64; 3]]) -> f64 {
        debug_assert_eq!(bloch.len(), self.qubits);
        let mut buf = self.coeffs.clone();
        let mut len = buf.len();
        for b in bloch.iter().rev() {
            len /= 4;
            for i in 0..len {
                let c = &buf[4 * i..4 * i + 4];
                buf[i] = c[0] + b[0] * c[1] + b[1] * c[2] + b[2] * c[3];
            }
        }
        buf[0]
    }

    /// `self += weight · product_features(bloch)`.
    pub fn accumulate_product(&mut self, weight: f64, bloch: &[[f64; 3]]) {
        debug_assert_eq!(bloch.len(), self.qubits);
        let features = Self::product_features(bloch);
        for (c, f) in self.coeffs.iter_mut().zip(features) {
            *c += weight * f;
        }
    }

    /// `Tr(P ρ)` for every Pauli string, i.e. the dual features of a density matrix.
    pub fn density_features(rho: &DensityMatrix) -> Vec<f64> {
        let dec = Self::from_matrix(rho.matrix()).expect("density matrices are Hermitian");
        let dim = rho.dim() as f64;
        dec.coeffs.iter().map(|c| c * dim).collect()
    }

    pub(crate) fn set_coeffs(&mut self, coeffs: &[f64]) {
        self.coeffs.copy_from_slice(coeffs);
    }

    pub(crate) fn add_scaled(&mut self, other: &Self, weight: f64) {
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += weight * o;
        }
    }

    /// `Σ_P self_P · other_P`, pairing an operator with accumulated features.
    pub fn pair(&self, other: &Self) -> f64 {
        self.dot(&other.coeffs)
    }

    pub fn dot(&self, features: &[f64]) -> f64 {
        self.coeffs.iter().zip(features).map(|(c, f)| c * f).sum()
    }

    /// Applies a single-qubit transfer matrix `t[b][a]` (`a` → `b`) on `qubit`.
    fn apply_transfer_1q(&mut self, qubit: usize, t: &[[f64; 4]; 4]) {
        let stride = 1usize << (2 * (self.qubits - 1 - qubit));
        let len = self.coeffs.len();
        let mut base = 0;
        while base < len {
            for offset in base..base + stride {
                let c = [
                    self.coeffs[offset],
                    self.coeffs[offset + stride],
                    self.coeffs[offset + 2 * stride],
                    self.coeffs[offset + 3 * stride],
                ];
                for (b, row) in t.iter().enumerate() {
                    self.coeffs[offset + b * stride] =
                        row[0] * c[0] + row[1] * c[1] + row[2] * c[2] + row[3] * c[3];
                }
            }
            base += 4 * stride;
        }
    }

    /// Applies a two-qubit signed-permutation transfer (Clifford gates).
    fn apply_transfer_2q(&mut self, q1: usize, q2: usize, t: &[(usize, f64); 16]) {
        let s1 = 1usize << (2 * (self.qubits - 1 - q1));
        let s2 = 1usize << (2 * (self.qubits - 1 - q2));
        let mut out = vec![0.0; self.coeffs.len()];
        for (index, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let (d1, d2) = ((index / s1) & 3, (index / s2) & 3);
            let rest = index - d1 * s1 - d2 * s2;
            let (image, sign) = t[4 * d1 + d2];
            out[rest + (image / 4) * s1 + (image % 4) * s2] += sign * c;
        }
        self.coeffs = out;
    }

    /// `O ← G† O G`.
    pub(crate) fn conjugate_by(&mut self, gate: &Gate, theta: f64) {
        match *gate {
            Gate::Id(_) => {}
            Gate::Rot { axis, qubit, .. } => self.apply_transfer_1q(qubit, &rotation_transfer(axis, theta)),
            Gate::Cx { control, target } => self.apply_transfer_2q(control, target, cx_transfer()),
            Gate::Cz(a, b) => self.apply_transfer_2q(a, b, cz_transfer()),
            _ => {
                let g = gate.single_qubit_matrix(0.0).expect("single-qubit gate");
                self.apply_transfer_1q(gate.targets()[0], &numeric_transfer(&g));
            }
        }
    }

    /// Adjoint of one noise layer (both depolarizing channels are self-adjoint).
    pub(crate) fn apply_adjoint_noise(&mut self, noise: &NoiseSpec, qubits: &[usize]) {
        match *noise {
            NoiseSpec::Depolarizing { p, scope: Scope::Global } => {
                self.coeffs.iter_mut().skip(1).for_each(|c| *c *= 1.0 - p);
            }
            NoiseSpec::Depolarizing { p, scope: Scope::PerQubit } => {
                let f = 1.0 - 4.0 * p / 3.0;
                for &q in qubits {
                    for index in 0..self.coeffs.len() {
                        if self.digit(index, q) != I {
                            self.coeffs[index] *= f;
                        }
                    }
                }
            }
            NoiseSpec::None | NoiseSpec::MeasurementShots { .. } => {}
        }
    }
}

/// Heisenberg transfer of `R_a(θ)`: `σ_a` fixed, `σ_b ↦ cosθ σ_b - sinθ σ_c`,
/// `σ_c ↦ cosθ σ_c + sinθ σ_b` for the cyclic triple `(a, b, c)`.
fn rotation_transfer(axis: Axis, theta: f64) -> [[f64; 4]; 4] {
    let (a, b, c) = match axis {
        Axis::X => (X, Y, Z),
        Axis::Y => (Y, Z, X),
        Axis::Z => (Z, X, Y),
    };
    let (cos, sin) = (theta.cos(), theta.sin());
    let mut t = [[0.0; 4]; 4];
    t[I][I] = 1.0;
    t[a][a] = 1.0;
    t[b][b] = cos;
    t[c][b] = -sin;
    t[c][c] = cos;
    t[b][c] = sin;
    t
}

fn single_pauli(code: usize) -> [[C64; 2]; 2] {
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for col in 0..2 {
        let (row, v) = pauli_entry(code, col);
        m[row][col] = v;
    }
    m
}

fn mul2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// `t[b][a] = Tr(σ_b G† σ_a G) / 2`.
fn numeric_transfer(g: &[[C64; 2]; 2]) -> [[f64; 4]; 4] {
    let gd = [[g[0][0].conj(), g[1][0].conj()], [g[0][1].conj(), g[1][1].conj()]];
    let mut t = [[0.0; 4]; 4];
    for a in 0..4 {
        let image = mul2(&mul2(&gd, &single_pauli(a)), g);
        for (b, row) in t.iter_mut().enumerate() {
            let prod = mul2(&single_pauli(b), &image);
            row[a] = 0.5 * (prod[0][0] + prod[1][1]).re;
        }
    }
    t
}

/// Signed permutation of two-qubit Pauli strings under `G† (·) G`.
fn clifford_transfer(gate: Gate) -> [(usize, f64); 16] {
    let u = gate.unitary(2, 0.0);
    let ud = u.adjoint();
    let mut out = [(0usize, 0.0f64); 16];
    let two = PauliOperator::zero(2);
    for (s, slot) in out.iter_mut().enumerate() {
        let mut p = two.clone();
        p.coeffs[s] = 1.0;
        let image = &(&ud * &p.to_matrix()) * &u;
        let dec = PauliOperator::from_matrix(&image).expect("Hermitian image");
        let (target, &sign) = dec
            .coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| c.abs() > 0.5)
            .expect("Clifford maps Paulis to Paulis");
        *slot = (target, sign.signum());
    }
    out
}

fn cx_transfer() -> &'static [(usize, f64); 16] {
    static T: OnceLock<[(usize, f64); 16]> = OnceLock::new();
    T.get_or_init(|| clifford_transfer(Gate::Cx { control: 0, target: 1 }))
}

fn cz_transfer() -> &'static [(usize, f64); 16] {
    static T: OnceLock<[(usize, f64); 16]> = OnceLock::new();
    T.get_or_init(|| clifford_transfer(Gate::Cz(0, 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Angle;

    fn random_hermitian(qubits: usize, seed: u64) -> ComplexMatrix {
        use rand::Rng;
        let mut rng = crate::rng::stream(seed);
        let dim = 1 << qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in r..dim {
                let z = if r == c {
                    C64::new(rng.random_range(-1.0..1.0), 0.0)
                } else {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                };
                m.set(r, c, z);
                m.set(c, r, z.conj());
            }
        }
        m
    }

    #[test]
    fn decomposition_round_trip() {
        let m = random_hermitian(3, 11);
        let back = PauliOperator::from_matrix(&m).unwrap().to_matrix();
        assert!(back.distance(&m).unwrap() < 1e-12);
    }

    #[test]
    fn z_operator_matrix() {
        let z = PauliOperator::z(2, 0).to_matrix();
        assert_eq!(z, ComplexMatrix::diag(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn conjugation_matches_matrices() {
        let gates = [
            (Gate::rx(1, Angle::Fixed(0.7)), 0.7),
            (Gate::ry(0, Angle::Fixed(-1.3)), -1.3),
            (Gate::rz(2, Angle::Fixed(2.1)), 2.1),
            (Gate::H(1), 0.0),
            (Gate::X(0), 0.0),
            (Gate::Y(2), 0.0),
            (Gate::Z(1), 0.0),
            (Gate::Cx { control: 0, target: 2 }, 0.0),
            (Gate::Cx { control: 2, target: 1 }, 0.0),
            (Gate::Cz(1, 2), 0.0),
        ];
        let m = random_hermitian(3, 5);
        for (gate, theta) in gates {
            let mut op = PauliOperator::from_matrix(&m).unwrap();
            op.conjugate_by(&gate, theta);
            let u = gate.unitary(3, theta);
            let expected = &(&u.adjoint() * &m) * &u;
            assert!(op.to_matrix().distance(&expected).unwrap() < 1e-12, "{gate:?}");
        }
    }

    #[test]
    fn product_features_give_expectations() {
        use crate::qcore::{pure_to_density, ProductState};
        let s = ProductState::new(vec![
            [C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
            [C64::new(0.8, 0.0), C64::new(-0.6, 0.0)],
        ])
        .unwrap();
        let m = random_hermitian(2, 3);
        let op = PauliOperator::from_matrix(&m).unwrap();
        let rho = pure_to_density(&s.to_pure()).unwrap();
        let direct = op.expectation(&rho).unwrap();
        let via = op.dot(&PauliOperator::product_features(&s.bloch_vectors()));
        assert!((direct - via).abs() < 1e-12);
        assert!((op.product_expectation(&s.bloch_vectors()) - direct).abs() < 1e-12);
        let dense = PauliOperator::density_features(&rho);
        assert!((op.dot(&dense) - direct).abs() < 1e-12);
    }
}
