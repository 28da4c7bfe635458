//! Hybrid classifier: encoded input → noise layer → RealAmplitudes ansatz →
//! `Z` readout → `p = (1 + ⟨Z⟩)/2` → binary cross-entropy.
//!
//! Training evaluates the observable in the Heisenberg picture: one
//! propagation of `Z` through the circuit per parameter setting serves the
//! whole dataset, and parameter-shift gradients only need the propagated
//! operator paired with the loss-weighted input features.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    build_real_amplitudes, heisenberg_shifted, sample_binary, Angle, Axis, Gate, GateShift,
    Observable, ParamCircuit, PauliOperator,
};
use crate::encoding::{encode_angles, feature_angles};
use crate::noise::NoiseSpec;
use crate::qcore::{DensityMatrix, ProductState};
use crate::rng::Stream;
use crate::{Error, Result};

const PROB_CLAMP: f64 = 1e-9;

/// Where identity gates carrying channel noise are placed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisePlacement {
    /// One identity per qubit right after the encoding layer.
    #[default]
    AfterEncoding,
    /// After the encoding layer and after every ansatz layer.
    EveryLayer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub qubits: usize,
    #[serde(default = "default_reps")]
    pub ansatz_reps: usize,
    #[serde(default = "default_axis")]
    pub encoding_axis: Axis,
    /// The observable is `Z` on this qubit.
    #[serde(default)]
    pub readout_qubit: usize,
    /// Noise applied when the model is queried.
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub noise_placement: NoisePlacement,
    /// Also apply `noise` during training.
    #[serde(default)]
    pub train_under_noise: bool,
    /// Finite-shot loss estimates during training; `None` means exact expectations.
    #[serde(default)]
    pub train_shots: Option<u64>,
}

fn default_reps() -> usize {
    1
}

fn default_axis() -> Axis {
    Axis::Y
}

impl ModelSpec {
    pub fn new(qubits: usize) -> Self {
        Self {
            qubits,
            ansatz_reps: default_reps(),
            encoding_axis: default_axis(),
            readout_qubit: 0,
            noise: NoiseSpec::None,
            noise_placement: NoisePlacement::AfterEncoding,
            train_under_noise: false,
            train_shots: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits == 0 || self.qubits > 8 {
            return Err(Error::Config(format!("qubits = {} must be in 1..=8", self.qubits)));
        }
        if self.ansatz_reps == 0 {
            return Err(Error::Config("ansatz_reps must be at least 1".into()));
        }
        if self.readout_qubit >= self.qubits {
            return Err(Error::Config(format!(
                "readout_qubit {} out of range for {} qubits",
                self.readout_qubit, self.qubits
            )));
        }
        if self.encoding_axis == Axis::Z {
            return Err(Error::Config("encoding_axis must be y or x".into()));
        }
        if self.train_shots == Some(0) {
            return Err(Error::Config("train_shots must be positive".into()));
        }
        self.noise.validate()
    }

    pub fn param_count(&self) -> usize {
        (self.ansatz_reps + 1) * self.qubits
    }

    pub fn observable(&self) -> Observable {
        Observable::z(self.qubits, self.readout_qubit)
    }

    /// Noise slots followed by the ansatz; the encoding itself is the input state.
    pub fn circuit(&self) -> ParamCircuit {
        let all: Vec<usize> = (0..self.qubits).collect();
        let mut c = ParamCircuit::new(self.qubits);
        c.push_noise_layer(&all).expect("in range");
        match self.noise_placement {
            NoisePlacement::AfterEncoding => c
                .then(&build_real_amplitudes(self.qubits, self.ansatz_reps))
                .expect("same register"),
            NoisePlacement::EveryLayer => {
                let mut slot = 0;
                for layer in 0..=self.ansatz_reps {
                    for q in 0..self.qubits {
                        c.push(Gate::ry(q, Angle::Param(slot))).expect("in range");
                        slot += 1;
                    }
                    if layer < self.ansatz_reps {
                        for q in 0..self.qubits - 1 {
                            c.push(Gate::Cx { control: q, target: q + 1 }).expect("in range");
                        }
                    }
                    c.push_noise_layer(&all).expect("in range");
                }
                c
            }
        }
    }

    /// Encodes scaled features `x ∈ [0,1]^m` with rotation angles `πx`.
    pub fn encode(&self, features: &[f64]) -> Result<ModelInput> {
        self.encode_angles(&feature_angles(features))
    }

    pub fn encode_angles(&self, angles: &[f64]) -> Result<ModelInput> {
        if angles.len() != self.qubits {
            return Err(Error::DimensionMismatch {
                expected: self.qubits,
                actual: angles.len(),
            });
        }
        Ok(ModelInput::from(&encode_angles(angles, self.encoding_axis)?))
    }
}

/// A quantum input in the form the classifier consumes.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelInput {
    /// Product state, one Bloch vector per qubit.
    Product(Vec<[f64; 3]>),
    /// Arbitrary state via its Pauli expectations `Tr(Pρ)`.
    Dense(Vec<f64>),
}

impl From<&ProductState> for ModelInput {
    fn from(s: &ProductState) -> Self {
        ModelInput::Product(s.bloch_vectors())
    }
}

impl From<&DensityMatrix> for ModelInput {
    fn from(rho: &DensityMatrix) -> Self {
        ModelInput::Dense(PauliOperator::density_features(rho))
    }
}

impl ModelInput {
    fn qubits(&self) -> usize {
        match self {
            ModelInput::Product(b) => b.len(),
            ModelInput::Dense(f) => f.len().trailing_zeros() as usize / 2,
        }
    }

    fn pair(&self, op: &PauliOperator) -> f64 {
        match self {
            ModelInput::Product(b) => op.product_expectation(b),
            ModelInput::Dense(f) => op.dot(f),
        }
    }

    fn accumulate_into(&self, acc: &mut PauliOperator, weight: f64) {
        match self {
            ModelInput::Product(b) => acc.accumulate_product(weight, b),
            ModelInput::Dense(f) => {
                let mut dense = PauliOperator::zero(acc.qubits());
                dense.set_coeffs(f);
                acc.add_scaled(&dense, weight);
            }
        }
    }
}

/// Encoded input with its binary label.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub input: ModelInput,
    pub label: u8,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    GradientDescent,
    Spsa,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    #[serde(default)]
    pub optimizer: Optimizer,
    #[serde(default)]
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be a non-negative number".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub params: Vec<f64>,
    /// Mean training loss at the start of each epoch.
    pub train_log: Vec<f64>,
    circuit: ParamCircuit,
    observable: PauliOperator,
}

/// Binary cross-entropy with `p` clamped to `[1e-9, 1 - 1e-9]`; label 1 ↔ `p` near 1.
pub fn bce(p: f64, label: u8) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if label == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// `∂ bce / ∂p`, zero where the clamp is active.
fn bce_slope(p: f64, label: u8) -> f64 {
    if !(PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&p) {
        return 0.0;
    }
    if label == 1 {
        -1.0 / p
    } else {
        1.0 / (1.0 - p)
    }
}

impl TrainedModel {
    /// A model at fixed parameters, e.g. an initialization.
    pub fn with_params(spec: ModelSpec, params: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        let circuit = spec.circuit();
        circuit.check_params(&params)?;
        let observable = PauliOperator::z(spec.qubits, spec.readout_qubit);
        Ok(Self {
            spec,
            params,
            train_log: Vec::new(),
            circuit,
            observable,
        })
    }

    pub fn circuit(&self) -> &ParamCircuit {
        &self.circuit
    }

    fn channel_noise(&self, noisy: bool) -> NoiseSpec {
        match self.spec.noise {
            NoiseSpec::Depolarizing { .. } if noisy => self.spec.noise,
            _ => NoiseSpec::None,
        }
    }

    /// Heisenberg-picture readout operator at `params`.
    fn readout(&self, params: &[f64], noisy: bool, shift: Option<GateShift>) -> PauliOperator {
        heisenberg_shifted(&self.circuit, params, &self.observable, &self.channel_noise(noisy), shift)
    }

    fn check_input(&self, input: &ModelInput) -> Result<()> {
        if input.qubits() != self.spec.qubits {
            return Err(Error::DimensionMismatch {
                expected: self.spec.qubits,
                actual: input.qubits(),
            });
        }
        Ok(())
    }

    /// `⟨O⟩` under the model's channel noise, exact.
    pub fn expectation(&self, input: &ModelInput) -> Result<f64> {
        self.check_input(input)?;
        Ok(input.pair(&self.readout(&self.params, true, None)))
    }

    /// Probability of label 1 from the exact expectation.
    pub fn predict_exact(&self, input: &ModelInput) -> Result<f64> {
        Ok(((1.0 + self.expectation(input)?) / 2.0).clamp(0.0, 1.0))
    }

    /// Probability of label 1 under the model's noise spec; with measurement
    /// noise the expectation is estimated from sampled shots.
    pub fn predict<R: Rng + ?Sized>(&self, input: &ModelInput, rng: &mut R) -> Result<f64> {
        let p = self.predict_exact(input)?;
        Ok(match self.spec.noise.shots() {
            Some(shots) => sample_binary(p, shots, rng) as f64 / shots as f64,
            None => p,
        })
    }

    pub fn loss<R: Rng + ?Sized>(&self, input: &ModelInput, label: u8, rng: &mut R) -> Result<f64> {
        check_label(label)?;
        Ok(bce(self.predict(input, rng)?, label))
    }

    /// Per-example losses in input order.
    pub fn evaluate_losses<R: Rng + ?Sized>(&self, examples: &[Example], rng: &mut R) -> Result<Vec<f64>> {
        if examples.is_empty() {
            return Err(Error::Empty("no examples to evaluate"));
        }
        let op = self.readout(&self.params, true, None);
        let shots = self.spec.noise.shots();
        examples
            .iter()
            .map(|ex| {
                self.check_input(&ex.input)?;
                let p = ((1.0 + ex.input.pair(&op)) / 2.0).clamp(0.0, 1.0);
                let p = match shots {
                    Some(n) => sample_binary(p, n, rng) as f64 / n as f64,
                    None => p,
                };
                Ok(bce(p, ex.label))
            })
            .collect()
    }

    /// Mean loss and its gradient (parameter shift through the chain rule),
    /// with exact expectations. The forward pass includes training noise when
    /// enabled; the derivative of `⟨O⟩` is taken on the noiseless circuit.
    pub fn loss_and_gradient(&self, params: &[f64], data: &[Example]) -> (f64, Vec<f64>) {
        let n = data.len() as f64;
        let op = self.readout(params, self.spec.train_under_noise, None);
        let mut weights = PauliOperator::zero(self.spec.qubits);
        let mut total = 0.0;
        for ex in data {
            let p = (1.0 + ex.input.pair(&op)) / 2.0;
            total += bce(p, ex.label);
            ex.input.accumulate_into(&mut weights, 0.5 * bce_slope(p, ex.label) / n);
        }
        let mut grad = vec![0.0; params.len()];
        for (index, gate) in self.circuit.gates().iter().enumerate() {
            let Some(slot) = gate.param_slot() else { continue };
            let at = |delta| {
                weights.pair(&self.readout(params, false, Some(GateShift { gate: index, delta })))
            };
            grad[slot] += 0.5 * (at(FRAC_PI_2) - at(-FRAC_PI_2));
        }
        (total / n, grad)
    }

    /// Mean loss at `params`, from shots when `train_shots` is set.
    fn training_loss(&self, params: &[f64], data: &[Example], rng: &mut Stream) -> f64 {
        let op = self.readout(params, self.spec.train_under_noise, None);
        let total: f64 = data
            .iter()
            .map(|ex| {
                let p = ((1.0 + ex.input.pair(&op)) / 2.0).clamp(0.0, 1.0);
                let p = match self.spec.train_shots {
                    Some(n) => sample_binary(p, n, rng) as f64 / n as f64,
                    None => p,
                };
                bce(p, ex.label)
            })
            .sum();
        total / data.len() as f64
    }
}

fn check_label(label: u8) -> Result<()> {
    if label > 1 {
        return Err(Error::domain(format!("label {label} is not binary")));
    }
    Ok(())
}

/// Uniform initialization on `[-0.1, 0.1]`.
pub fn initial_params(count: usize, rng: &mut Stream) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(-0.1..=0.1)).collect()
}

/// Full-batch training from a seeded initialization.
pub fn train(data: &[Example], spec: &ModelSpec, cfg: &TrainConfig) -> Result<TrainedModel> {
    if data.is_empty() {
        return Err(Error::Empty("training data"));
    }
    cfg.validate()?;
    let mut rng = crate::rng::stream(cfg.seed);
    let init = initial_params(spec.param_count(), &mut rng);
    let mut model = TrainedModel::with_params(spec.clone(), init)?;
    for ex in data {
        model.check_input(&ex.input)?;
        check_label(ex.label)?;
    }
    let mut params = model.params.clone();
    let mut log = Vec::with_capacity(cfg.epochs);
    match (cfg.optimizer, spec.train_shots) {
        (Optimizer::GradientDescent, None) => {
            for _ in 0..cfg.epochs {
                let (loss, grad) = model.loss_and_gradient(&params, data);
                log.push(loss);
                for (p, g) in params.iter_mut().zip(&grad) {
                    *p -= cfg.learning_rate * g;
                }
            }
        }
        (Optimizer::GradientDescent, Some(_)) => {
            return Err(Error::Config(
                "finite-shot training (train_shots) requires optimizer = \"spsa\"".into(),
            ))
        }
        (Optimizer::Spsa, _) => {
            for k in 1..=cfg.epochs {
                let kf = k as f64;
                let ck = 0.1 * kf.powf(-0.101);
                let ak = cfg.learning_rate * kf.powf(-0.602);
                let delta: Vec<f64> = (0..params.len())
                    .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                    .collect();
                let plus: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p + ck * d).collect();
                let minus: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p - ck * d).collect();
                let lp = model.training_loss(&plus, data, &mut rng);
                let lm = model.training_loss(&minus, data, &mut rng);
                log.push(0.5 * (lp + lm));
                let scale = (lp - lm) / (2.0 * ck);
                for (p, d) in params.iter_mut().zip(&delta) {
                    *p -= ak * scale * d;
                }
            }
        }
    }
    model.params = params;
    model.train_log = log;
    Ok(model)
}
