use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::qcore::{ComplexMatrix, C64};
use crate::{Error, Result};

/// Rotation axis of an `R_a(θ) = exp(-iθσ_a/2)` gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    /// Index into the circuit's parameter vector.
    Param(usize),
    Fixed(f64),
}

impl Angle {
    pub(crate) fn resolve(self, params: &[f64]) -> f64 {
        match self {
            Angle::Param(i) => params[i],
            Angle::Fixed(v) => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    Rot { axis: Axis, qubit: usize, angle: Angle },
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    /// Controlled-X.
    Cx { control: usize, target: usize },
    Cz(usize, usize),
    /// Identity; marks where channel noise is inserted.
    Id(usize),
}

impl Gate {
    pub fn rx(qubit: usize, angle: Angle) -> Self {
        Gate::Rot { axis: Axis::X, qubit, angle }
    }

    pub fn ry(qubit: usize, angle: Angle) -> Self {
        Gate::Rot { axis: Axis::Y, qubit, angle }
    }

    pub fn rz(qubit: usize, angle: Angle) -> Self {
        Gate::Rot { axis: Axis::Z, qubit, angle }
    }

    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::Rot { qubit, .. } => vec![qubit],
            Gate::H(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) | Gate::Id(q) => vec![q],
            Gate::Cx { control, target } => vec![control, target],
            Gate::Cz(a, b) => vec![a, b],
        }
    }

    pub fn param_slot(&self) -> Option<usize> {
        match self {
            Gate::Rot { angle: Angle::Param(i), .. } => Some(*i),
            _ => None,
        }
    }

    /// 2x2 matrix of a single-qubit gate at the given rotation angle.
    pub(crate) fn single_qubit_matrix(&self, theta: f64) -> Option<[[C64; 2]; 2]> {
        let r = |x: f64| C64::new(x, 0.0);
        let i = |x: f64| C64::new(0.0, x);
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        Some(match self {
            Gate::Rot { axis: Axis::X, .. } => [[r(c), i(-s)], [i(-s), r(c)]],
            Gate::Rot { axis: Axis::Y, .. } => [[r(c), r(-s)], [r(s), r(c)]],
            Gate::Rot { axis: Axis::Z, .. } => [
                [C64::from_polar(1.0, -theta / 2.0), r(0.0)],
                [r(0.0), C64::from_polar(1.0, theta / 2.0)],
            ],
            Gate::H(_) => [[r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)], [r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)]],
            Gate::X(_) => [[r(0.0), r(1.0)], [r(1.0), r(0.0)]],
            Gate::Y(_) => [[r(0.0), i(-1.0)], [i(1.0), r(0.0)]],
            Gate::Z(_) => [[r(1.0), r(0.0)], [r(0.0), r(-1.0)]],
            Gate::Id(_) => [[r(1.0), r(0.0)], [r(0.0), r(1.0)]],
            Gate::Cx { .. } | Gate::Cz(..) => return None,
        })
    }

    /// Full `2^n x 2^n` unitary of this gate, for cross-checks.
    pub fn unitary(&self, qubits: usize, theta: f64) -> ComplexMatrix {
        let dim = 1usize << qubits;
        let mut u = ComplexMatrix::zeros(dim, dim);
        let bit = |q: usize| 1usize << (qubits - 1 - q);
        for col in 0..dim {
            match (self.single_qubit_matrix(theta), *self) {
                (Some(g), _) => {
                    let b = bit(self.targets()[0]);
                    let v = usize::from(col & b != 0);
                    for out in 0..2 {
                        let row = if out == 1 { col | b } else { col & !b };
                        u.set(row, col, g[out][v]);
                    }
                }
                (None, Gate::Cx { control, target }) => {
                    let row = if col & bit(control) != 0 { col ^ bit(target) } else { col };
                    u.set(row, col, C64::new(1.0, 0.0));
                }
                (None, Gate::Cz(a, b)) => {
                    let both = col & bit(a) != 0 && col & bit(b) != 0;
                    u.set(col, col, C64::new(if both { -1.0 } else { 1.0 }, 0.0));
                }
                _ => unreachable!(),
            }
        }
        u
    }
}

/// A noise layer: the channel acts on `qubits` after the first `position` gates.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSlot {
    pub position: usize,
    pub qubits: Vec<usize>,
}

/// Temporary angle offset on one gate, used for parameter-shift evaluations.
#[derive(Clone, Copy, Debug)]
pub(crate) struct GateShift {
    pub gate: usize,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamCircuit {
    qubits: usize,
    gates: Vec<Gate>,
    param_count: usize,
    noise_slots: Vec<NoiseSlot>,
}

impl ParamCircuit {
    pub fn new(qubits: usize) -> Self {
        Self {
            qubits,
            gates: Vec::new(),
            param_count: 0,
            noise_slots: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        let targets = gate.targets();
        if let Some(&q) = targets.iter().find(|&&q| q >= self.qubits) {
            return Err(Error::InvalidCircuit(format!(
                "qubit {q} out of range for {} qubits",
                self.qubits
            )));
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::InvalidCircuit("two-qubit gate needs distinct targets".into()));
        }
        if let Some(slot) = gate.param_slot() {
            self.param_count = self.param_count.max(slot + 1);
        }
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends one identity gate per listed qubit and registers a noise layer there.
    pub fn push_noise_layer(&mut self, qubits: &[usize]) -> Result<&mut Self> {
        let position = self.gates.len();
        for &q in qubits {
            self.push(Gate::Id(q))?;
        }
        self.noise_slots.push(NoiseSlot {
            position,
            qubits: qubits.to_vec(),
        });
        Ok(self)
    }

    /// Declares extra unused parameters, e.g. to keep a fixed vector layout.
    pub fn reserve_params(&mut self, count: usize) {
        self.param_count = self.param_count.max(count);
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn noise_slots(&self) -> &[NoiseSlot] {
        &self.noise_slots
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::ParamLength {
                expected: self.param_count,
                actual: params.len(),
            });
        }
        Ok(())
    }

    /// Appends `other` (on the same register) after `self`, shifting its noise slots.
    pub fn then(&self, other: &ParamCircuit) -> Result<ParamCircuit> {
        if self.qubits != other.qubits {
            return Err(Error::DimensionMismatch {
                expected: self.qubits,
                actual: other.qubits,
            });
        }
        let mut out = self.clone();
        let offset = out.gates.len();
        out.gates.extend_from_slice(&other.gates);
        out.param_count = out.param_count.max(other.param_count);
        out.noise_slots.extend(other.noise_slots.iter().map(|s| NoiseSlot {
            position: s.position + offset,
            qubits: s.qubits.clone(),
        }));
        Ok(out)
    }
}

/// RealAmplitudes ansatz: `reps` blocks of (RY layer, linear CX chain) followed
/// by a final RY layer; `(reps + 1) * qubits` parameters.
pub fn build_real_amplitudes(qubits: usize, reps: usize) -> ParamCircuit {
    assert!(qubits >= 1 && reps >= 1, "RealAmplitudes needs qubits >= 1 and reps >= 1");
    let mut c = ParamCircuit::new(qubits);
    let mut slot = 0;
    for layer in 0..=reps {
        for q in 0..qubits {
            c.push(Gate::ry(q, Angle::Param(slot))).expect("in range");
            slot += 1;
        }
        if layer < reps {
            for q in 0..qubits.saturating_sub(1) {
                c.push(Gate::Cx { control: q, target: q + 1 }).expect("in range");
            }
        }
    }
    c
}
