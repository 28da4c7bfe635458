use super::gate::{Gate, GateShift, ParamCircuit};
use super::pauli::PauliOperator;
use crate::noise::NoiseSpec;
use crate::qcore::{ComplexMatrix, DensityMatrix, PureState, C64};
use crate::{Error, Result};

#[inline]
fn bit(qubits: usize, q: usize) -> usize {
    1usize << (qubits - 1 - q)
}

fn apply_single(amps: &mut [C64], qubits: usize, q: usize, g: &[[C64; 2]; 2]) {
    let b = bit(qubits, q);
    for i in 0..amps.len() {
        if i & b == 0 {
            let (x, y) = (amps[i], amps[i | b]);
            amps[i] = g[0][0] * x + g[0][1] * y;
            amps[i | b] = g[1][0] * x + g[1][1] * y;
        }
    }
}

fn apply_gate_state(amps: &mut [C64], qubits: usize, gate: &Gate, theta: f64) {
    match *gate {
        Gate::Id(_) => {}
        Gate::Cx { control, target } => {
            let (c, t) = (bit(qubits, control), bit(qubits, target));
            for i in 0..amps.len() {
                if i & c != 0 && i & t == 0 {
                    amps.swap(i, i | t);
                }
            }
        }
        Gate::Cz(a, b) => {
            let mask = bit(qubits, a) | bit(qubits, b);
            for (i, amp) in amps.iter_mut().enumerate() {
                if i & mask == mask {
                    *amp = -*amp;
                }
            }
        }
        _ => {
            let g = gate.single_qubit_matrix(theta).expect("single-qubit gate");
            apply_single(amps, qubits, gate.targets()[0], &g);
        }
    }
}

fn gate_angle(gate: &Gate, index: usize, params: &[f64], shift: Option<GateShift>) -> f64 {
    let base = match gate {
        Gate::Rot { angle, .. } => angle.resolve(params),
        _ => 0.0,
    };
    match shift {
        Some(s) if s.gate == index => base + s.delta,
        _ => base,
    }
}

/// `U|ψ⟩` for the noiseless circuit. Noise slots are ignored.
pub fn apply_circuit_pure(c: &ParamCircuit, params: &[f64], input: &PureState) -> Result<PureState> {
    c.check_params(params)?;
    if input.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            actual: input.dim(),
        });
    }
    let mut amps = input.amplitudes().to_vec();
    for (i, gate) in c.gates().iter().enumerate() {
        apply_gate_state(&mut amps, c.qubits(), gate, gate_angle(gate, i, params, None));
    }
    Ok(PureState::from_unitary_output(amps))
}

/// `ρ ↦ GρG†` in place: `G` on rows, then `G*` on columns.
fn conjugate_gate(m: &mut ComplexMatrix, qubits: usize, gate: &Gate, theta: f64) {
    let dim = m.rows();
    let data = m.as_mut_slice();
    let mut column = vec![C64::new(0.0, 0.0); dim];
    for c in 0..dim {
        for r in 0..dim {
            column[r] = data[r * dim + c];
        }
        apply_gate_state(&mut column, qubits, gate, theta);
        for r in 0..dim {
            data[r * dim + c] = column[r];
        }
    }
    // (ρG†)ᵣ = (G ρᵣ†)† row-wise: conjugate, apply, conjugate back.
    for r in 0..dim {
        let row = &mut data[r * dim..(r + 1) * dim];
        row.iter_mut().for_each(|z| *z = z.conj());
        apply_gate_state(row, qubits, gate, theta);
        row.iter_mut().for_each(|z| *z = z.conj());
    }
}

/// Gate-by-gate `UρU†` with `noise` applied at each declared noise slot.
pub fn apply_circuit_density(
    c: &ParamCircuit,
    params: &[f64],
    input: &DensityMatrix,
    noise: &NoiseSpec,
) -> Result<DensityMatrix> {
    apply_density_shifted(c, params, input, noise, None)
}

pub(crate) fn apply_density_shifted(
    c: &ParamCircuit,
    params: &[f64],
    input: &DensityMatrix,
    noise: &NoiseSpec,
    shift: Option<GateShift>,
) -> Result<DensityMatrix> {
    c.check_params(params)?;
    noise.validate()?;
    if input.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            actual: input.dim(),
        });
    }
    let gates = c.gates();
    let mut rho = input.clone();
    for pos in 0..=gates.len() {
        for slot in c.noise_slots().iter().filter(|s| s.position == pos) {
            rho = noise.apply_layer(rho, &slot.qubits)?;
        }
        if let Some(gate) = gates.get(pos) {
            let mut m = rho.into_matrix();
            conjugate_gate(&mut m, c.qubits(), gate, gate_angle(gate, pos, params, shift));
            rho = DensityMatrix::from_channel_output(m);
        }
    }
    Ok(rho)
}

/// Heisenberg image `U† O U` of an observable, with the adjoint channel at
/// each noise slot.
pub(crate) fn heisenberg_shifted(
    c: &ParamCircuit,
    params: &[f64],
    obs: &PauliOperator,
    noise: &NoiseSpec,
    shift: Option<GateShift>,
) -> PauliOperator {
    let gates = c.gates();
    let mut op = obs.clone();
    for pos in (0..=gates.len()).rev() {
        if pos < gates.len() {
            let gate = &gates[pos];
            op.conjugate_by(gate, gate_angle(gate, pos, params, shift));
        }
        for slot in c.noise_slots().iter().filter(|s| s.position == pos) {
            op.apply_adjoint_noise(noise, &slot.qubits);
        }
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Angle, ParamCircuit};
    use crate::qcore::pure_to_density;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close_up_to_phase(a: &PureState, b: &PureState, tol: f64) -> bool {
        (a.inner(b).unwrap().norm() - 1.0).abs() < tol
    }

    #[test]
    fn ry_pi_flips() {
        let mut c = ParamCircuit::new(1);
        c.push(Gate::ry(0, Angle::Param(0))).unwrap();
        let out = apply_circuit_pure(&c, &[PI], &PureState::zero(1)).unwrap();
        assert!(close_up_to_phase(&out, &PureState::basis(1, 1), 1e-12));
    }

    #[test]
    fn hadamard_on_zero() {
        let mut c = ParamCircuit::new(1);
        c.push(Gate::H(0)).unwrap();
        let out = apply_circuit_pure(&c, &[], &PureState::zero(1)).unwrap();
        for a in out.amplitudes() {
            assert!((a.re - FRAC_1_SQRT_2).abs() < 1e-12 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn cnot_truth_table() {
        let mut c = ParamCircuit::new(2);
        c.push(Gate::Cx { control: 0, target: 1 }).unwrap();
        let out = apply_circuit_pure(&c, &[], &PureState::basis(2, 0b10)).unwrap();
        assert_eq!(out, PureState::basis(2, 0b11));
        let out = apply_circuit_pure(&c, &[], &PureState::basis(2, 0b01)).unwrap();
        assert_eq!(out, PureState::basis(2, 0b01));
    }

    #[test]
    fn param_length_checked() {
        let c = crate::circuit::build_real_amplitudes(2, 1);
        assert!(matches!(
            apply_circuit_pure(&c, &[0.0; 3], &PureState::zero(2)),
            Err(Error::ParamLength { expected: 4, actual: 3 })
        ));
    }

    #[test]
    fn density_examples() {
        let mut c = ParamCircuit::new(1);
        c.push(Gate::H(0)).unwrap();
        c.push_noise_layer(&[0]).unwrap();
        let rho0 = pure_to_density(&PureState::zero(1)).unwrap();

        let noiseless = apply_circuit_density(&c, &[], &rho0, &NoiseSpec::None).unwrap();
        let pure = apply_circuit_pure(&c, &[], &PureState::zero(1)).unwrap();
        let expected = pure_to_density(&pure).unwrap();
        assert!(noiseless.matrix().distance(expected.matrix()).unwrap() < 1e-12);

        let full = apply_circuit_density(&c, &[], &rho0, &NoiseSpec::depolarizing(1.0)).unwrap();
        let mixed = ComplexMatrix::identity(2).scale(0.5);
        assert!(full.matrix().distance(&mixed).unwrap() < 1e-12);

        let mut prep = ParamCircuit::new(1);
        prep.push_noise_layer(&[0]).unwrap();
        let half = apply_circuit_density(&prep, &[], &rho0, &NoiseSpec::depolarizing(0.5)).unwrap();
        assert!(half.matrix().distance(&ComplexMatrix::diag(&[0.75, 0.25])).unwrap() < 1e-12);
    }
}
