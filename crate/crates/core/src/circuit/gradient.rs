use std::f64::consts::FRAC_PI_2;

use super::gate::{Gate, GateShift, ParamCircuit};
use super::observable::{expectation, Observable};
use super::simulate::apply_density_shifted;
use crate::noise::NoiseSpec;
use crate::qcore::DensityMatrix;
use crate::Result;

/// `∂⟨O⟩/∂θⱼ` by the parameter-shift rule on the noiseless circuit.
///
/// A parameter shared by several rotations gets one shifted pair per gate,
/// summed. Only rotation gates carry parameters, so every slot is shiftable.
pub fn parameter_shift_gradient(
    c: &ParamCircuit,
    params: &[f64],
    input: &DensityMatrix,
    obs: &Observable,
) -> Result<Vec<f64>> {
    c.check_params(params)?;
    let mut grad = vec![0.0; c.param_count()];
    for (index, gate) in c.gates().iter().enumerate() {
        let Gate::Rot { .. } = gate else { continue };
        let Some(slot) = gate.param_slot() else { continue };
        let eval = |delta: f64| -> Result<f64> {
            let shift = Some(GateShift { gate: index, delta });
            let rho = apply_density_shifted(c, params, input, &NoiseSpec::None, shift)?;
            expectation(&rho, obs)
        };
        grad[slot] += 0.5 * (eval(FRAC_PI_2)? - eval(-FRAC_PI_2)?);
    }
    Ok(grad)
}
