#![allow(dead_code)]

use qdp_audit::circuit::{Angle, Axis, Gate, ParamCircuit};
use qdp_audit::qcore::{ComplexMatrix, DensityMatrix, PureState, C64};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    Distribution::<f64>::sample(&StandardNormal, rng)
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn random_pure<R: Rng>(dim: usize, rng: &mut R) -> PureState {
    let v: Vec<C64> = (0..dim).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    PureState::new(v.into_iter().map(|z| z / norm).collect()).unwrap()
}

/// Full-rank mixed state `GG†/Tr(GG†)` from a complex Gaussian `G`.
pub fn random_density<R: Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g: Vec<C64> = (0..dim * dim).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect();
    let g = ComplexMatrix::from_vec(dim, dim, g).unwrap();
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    let mut m = m.scale(1.0 / tr);
    // Symmetrize away rounding so the Hermitian check is exact.
    let h = &m + &m.adjoint();
    m = h.scale(0.5);
    DensityMatrix::new(m).unwrap()
}

/// Layered circuit: random-axis rotations on every qubit, then a random
/// CX/CZ entangling chain, `reps` times, with a final rotation layer.
pub fn random_circuit<R: Rng>(qubits: usize, reps: usize, rng: &mut R) -> ParamCircuit {
    let mut c = ParamCircuit::new(qubits);
    let mut slot = 0;
    for layer in 0..=reps {
        for q in 0..qubits {
            let axis = [Axis::X, Axis::Y, Axis::Z][rng.random_range(0..3)];
            c.push(Gate::Rot { axis, qubit: q, angle: Angle::Param(slot) }).unwrap();
            slot += 1;
        }
        if layer < reps {
            for q in 0..qubits - 1 {
                let g = if rng.random_bool(0.5) {
                    Gate::Cx { control: q, target: q + 1 }
                } else {
                    Gate::Cz(q, q + 1)
                };
                c.push(g).unwrap();
            }
        }
    }
    c
}

pub fn random_params<R: Rng>(count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
}
