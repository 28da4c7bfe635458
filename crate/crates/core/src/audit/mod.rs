//! The lifted canary audit.
//!
//! Each trial draws `2K` canaries, encodes the first `K` two ways (plain angle
//! encoding and the offset encoding), trains one model on each augmented
//! dataset and records whether canary losses fall below a threshold `κ`.
//! Confidence bounds on the seen/unseen indicator rates give a lower bound
//! `ε̂` on the privacy loss that holds with probability `1 - β`.

mod canary;
mod estimator;
mod synthetic;
mod theory;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use canary::{feature_moments, generate_canaries};
pub use estimator::{
    bound_lower, bound_upper, epsilon_hat, mean_and_variance, row_means, EmpiricalBernstein,
    MeanBound, TrialMatrix,
};
pub use synthetic::{
    coverage, simulate_known_mechanism, trials_to_target, CoverageSummary, KnownMechanism,
};
pub use theory::{
    sample_complexity_estimate, theory_epsilon_depolarizing, theory_epsilon_measurement,
    MeasurementBound,
};

use crate::data::Dataset;
use crate::encoding::{sample_offsets, CanaryPair, OffsetSpec, DEFAULT_DELTA_CONF};
use crate::noise::{NoiseSpec, Scope};
use crate::qml::{train, Example, ModelInput, ModelSpec, TrainConfig, TrainedModel};
use crate::rng::{derive_seed, derived_stream, Purpose};
use crate::{Error, Result};

/// Floor applied to the estimated minimum outcome probability `μ`.
pub const MU_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaRule {
    /// Median loss of a reference model (trained without canaries) on fresh canaries.
    #[default]
    CalibratedMedian,
    Fixed(f64),
}

/// Which encoding canaries are presented in at evaluation time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalEncoding {
    Phi1,
    /// The offset encoding, identical to the seen model's training inputs.
    #[default]
    Phi2,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// One indicator per canary.
    #[default]
    PerCanary,
    /// One indicator per trial: all `K` losses below `κ`.
    Conjunction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    /// Number of trials.
    pub n: usize,
    /// Canaries per set; `2K` are drawn per trial.
    pub k: usize,
    /// Per-qubit trace-distance threshold for canary pairs.
    pub d: f64,
    #[serde(default = "default_delta_conf")]
    pub delta_conf: f64,
    pub beta: f64,
    /// `δ` in `ε̂`. Defaults to 0, or to the theory `δ` for measurement noise.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub kappa: KappaRule,
    #[serde(default = "default_calibration_canaries")]
    pub calibration_canaries: usize,
    #[serde(default)]
    pub eval_encoding: EvalEncoding,
    #[serde(default)]
    pub statistic: Statistic,
    /// Target `δ` for the measurement-noise bound.
    #[serde(default = "default_theory_target_delta")]
    pub theory_target_delta: f64,
    /// Start both models of a trial from the same initialization.
    #[serde(default = "default_true")]
    pub shared_init: bool,
    #[serde(default)]
    pub seed: u64,
    /// The model; its `noise` is the inference-time mechanism being audited.
    pub model: ModelSpec,
    /// Training settings; `train.seed` is replaced by per-trial seeds.
    pub train: TrainConfig,
}

fn default_delta_conf() -> f64 {
    DEFAULT_DELTA_CONF
}

fn default_calibration_canaries() -> usize {
    64
}

fn default_theory_target_delta() -> f64 {
    1e-5
}

fn default_true() -> bool {
    true
}

impl AuditConfig {
    pub fn new(n: usize, k: usize, d: f64, beta: f64, model: ModelSpec, train: TrainConfig) -> Self {
        Self {
            n,
            k,
            d,
            delta_conf: DEFAULT_DELTA_CONF,
            beta,
            delta: None,
            kappa: KappaRule::default(),
            calibration_canaries: default_calibration_canaries(),
            eval_encoding: EvalEncoding::default(),
            statistic: Statistic::default(),
            theory_target_delta: default_theory_target_delta(),
            shared_init: true,
            seed: 0,
            model,
            train,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("beta = {} must lie in (0, 1)", self.beta)));
        }
        if let Some(delta) = self.delta {
            if !(0.0..1.0).contains(&delta) {
                return Err(Error::Config(format!("delta = {delta} must lie in [0, 1)")));
            }
        }
        if self.calibration_canaries == 0 {
            return Err(Error::Config("calibration_canaries must be at least 1".into()));
        }
        if let KappaRule::Fixed(v) = self.kappa {
            if v.is_nan() {
                return Err(Error::Config("fixed kappa must be a number".into()));
            }
        }
        if !(self.theory_target_delta > 0.0 && self.theory_target_delta < 1.0) {
            return Err(Error::Config("theory_target_delta must lie in (0, 1)".into()));
        }
        OffsetSpec::at_bounds(self.d, self.delta_conf)
            .map_err(|e| Error::Config(e.to_string()))?;
        self.model.validate()?;
        self.train.validate()
    }

    fn check_dataset(&self, dataset: &Dataset) -> Result<()> {
        if dataset.is_empty() {
            return Err(Error::Empty("audit dataset"));
        }
        if dataset.feature_count != self.model.qubits {
            return Err(Error::Config(format!(
                "dataset has {} features but the model has {} qubits",
                dataset.feature_count, self.model.qubits
            )));
        }
        Ok(())
    }

    fn offsets(&self) -> Result<OffsetSpec> {
        OffsetSpec::at_bounds(self.d, self.delta_conf)
    }

    fn train_with_seed(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            seed,
            ..self.train.clone()
        }
    }
}

/// `ε̂` with the bounds it was computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonEstimate {
    pub p1_lower: f64,
    pub p0_upper: f64,
    pub epsilon_hat: f64,
    pub beta: f64,
    pub delta: f64,
    /// Closed-form `ε` of the audited mechanism; `None` when unbounded or undefined.
    pub theory_epsilon: Option<f64>,
    pub guarantee: String,
}

impl EpsilonEstimate {
    /// Bounds at `β/2` on each side, so that `P(ε < ε̂) ≤ β`.
    pub fn from_matrix(
        matrix: &TrialMatrix,
        beta: f64,
        delta: f64,
        theory_epsilon: Option<f64>,
    ) -> Result<Self> {
        let p1_lower = bound_lower(&matrix.x, beta / 2.0)?;
        let p0_upper = bound_upper(&matrix.y, beta / 2.0)?;
        Ok(Self {
            p1_lower,
            p0_upper,
            epsilon_hat: epsilon_hat(p1_lower, p0_upper, delta),
            beta,
            delta,
            theory_epsilon,
            guarantee: format!("P(epsilon < epsilon_hat) <= {beta}"),
        })
    }
}

/// Indicator rows and diagnostics from one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub index: usize,
    pub seed: u64,
    /// Seen canaries scored by the model trained on their offset encoding.
    pub x: Vec<bool>,
    /// Unseen canaries scored by the model trained on the plain encoding.
    pub y: Vec<bool>,
    pub seen_losses: Vec<f64>,
    pub unseen_losses: Vec<f64>,
    pub max_qubit_distance: f64,
    pub full_distances: Vec<f64>,
}

/// Output of [`calibrate_kappa`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub kappa: f64,
    pub losses: Vec<f64>,
    /// Smallest noiseless outcome probability over the calibration canaries.
    pub min_outcome_probability: f64,
}

fn encode_base(spec: &ModelSpec, dataset: &Dataset) -> Result<Vec<Example>> {
    dataset
        .records
        .iter()
        .map(|r| {
            Ok(Example {
                input: spec.encode(&r.features)?,
                label: r.label,
            })
        })
        .collect()
}

fn canary_pairs(
    config: &AuditConfig,
    dataset: &Dataset,
    count: usize,
    seed: u64,
    index: u64,
) -> Result<Vec<CanaryPair>> {
    let records = generate_canaries(
        dataset,
        count,
        &mut derived_stream(seed, Purpose::Canaries, index),
    )?;
    let spec = config.offsets()?;
    let mut rng = derived_stream(seed, Purpose::Offsets, index);
    let pairs = records
        .into_iter()
        .map(|r| {
            let alpha = sample_offsets(&spec, r.features.len(), &mut rng);
            CanaryPair::new(r.features, r.label, alpha, config.model.encoding_axis)
        })
        .collect::<Result<Vec<_>>>()?;
    for pair in &pairs {
        if pair.max_qubit_distance() > config.d + 1e-12 {
            return Err(Error::domain(format!(
                "canary pair at per-qubit distance {} exceeds d = {}",
                pair.max_qubit_distance(),
                config.d
            )));
        }
    }
    Ok(pairs)
}

fn as_example(pair: &CanaryPair, encoding: EvalEncoding) -> Example {
    let state = match encoding {
        EvalEncoding::Phi1 => &pair.state_phi1,
        EvalEncoding::Phi2 => &pair.state_phi2,
    };
    Example {
        input: ModelInput::from(state),
        label: pair.label,
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Trains a reference model on the dataset alone and scores fresh canaries
/// under the audited noise. `κ` is the median loss (or the fixed value).
pub fn calibrate_kappa(config: &AuditConfig, dataset: &Dataset) -> Result<Calibration> {
    config.validate()?;
    config.check_dataset(dataset)?;
    let seed = derive_seed(config.seed, Purpose::Kappa, 0);
    let base = encode_base(&config.model, dataset)?;
    let reference = train(&base, &config.model, &config.train_with_seed(seed))?;
    let pairs = canary_pairs(config, dataset, config.calibration_canaries, seed, 0)?;
    let examples: Vec<Example> = pairs.iter().map(|p| as_example(p, config.eval_encoding)).collect();
    let losses =
        reference.evaluate_losses(&examples, &mut derived_stream(seed, Purpose::Shots, 0))?;
    let noiseless = TrainedModel::with_params(
        ModelSpec {
            noise: NoiseSpec::None,
            ..config.model.clone()
        },
        reference.params.clone(),
    )?;
    let mut min_prob = 0.5f64;
    for ex in &examples {
        let p = noiseless.predict_exact(&ex.input)?;
        min_prob = min_prob.min(p.min(1.0 - p));
    }
    let kappa = match config.kappa {
        KappaRule::CalibratedMedian => median(&losses),
        KappaRule::Fixed(v) => v,
    };
    Ok(Calibration {
        kappa,
        losses,
        min_outcome_probability: min_prob,
    })
}

/// One trial of the lifted audit at threshold `kappa`.
pub fn run_trial(
    index: usize,
    config: &AuditConfig,
    dataset: &Dataset,
    kappa: f64,
) -> Result<TrialOutcome> {
    config.check_dataset(dataset)?;
    let base = encode_base(&config.model, dataset)?;
    run_trial_with_base(index, config, dataset, &base, kappa)
}

fn run_trial_with_base(
    index: usize,
    config: &AuditConfig,
    dataset: &Dataset,
    base: &[Example],
    kappa: f64,
) -> Result<TrialOutcome> {
    let k = config.k;
    let seed = derive_seed(config.seed, Purpose::Trial, index as u64);
    let pairs = canary_pairs(config, dataset, 2 * k, seed, 0)?;

    let augmented = |encoding| {
        let mut data = base.to_vec();
        data.extend(pairs[..k].iter().map(|p| as_example(p, encoding)));
        data
    };
    let seen_seed = derive_seed(seed, Purpose::InitSeen, 0);
    let unseen_seed = if config.shared_init {
        seen_seed
    } else {
        derive_seed(seed, Purpose::InitUnseen, 0)
    };
    let theta0 = train(&augmented(EvalEncoding::Phi1), &config.model, &config.train_with_seed(unseen_seed))?;
    let theta1 = train(&augmented(EvalEncoding::Phi2), &config.model, &config.train_with_seed(seen_seed))?;

    let eval = |pairs: &[CanaryPair]| -> Vec<Example> {
        pairs.iter().map(|p| as_example(p, config.eval_encoding)).collect()
    };
    let seen_losses =
        theta1.evaluate_losses(&eval(&pairs[..k]), &mut derived_stream(seed, Purpose::Shots, 1))?;
    let unseen_losses =
        theta0.evaluate_losses(&eval(&pairs[k..]), &mut derived_stream(seed, Purpose::Shots, 0))?;

    let indicators = |losses: &[f64]| -> Vec<bool> {
        let below = losses.iter().map(|&l| l < kappa);
        match config.statistic {
            Statistic::PerCanary => below.collect(),
            Statistic::Conjunction => vec![below.fold(true, |a, b| a && b)],
        }
    };
    Ok(TrialOutcome {
        index,
        seed,
        x: indicators(&seen_losses),
        y: indicators(&unseen_losses),
        seen_losses,
        unseen_losses,
        max_qubit_distance: pairs.iter().map(CanaryPair::max_qubit_distance).fold(0.0, f64::max),
        full_distances: pairs.iter().map(|p| p.full_distance).collect(),
    })
}

/// Closed-form privacy of the audited mechanism.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub mechanism: String,
    /// `None` when the bound is infinite or not defined for this mechanism.
    pub epsilon: Option<f64>,
    pub d: f64,
    pub dimension: usize,
    pub measurement: Option<MeasurementBound>,
    pub mu: Option<f64>,
    pub mu_floor: f64,
    pub rank: Option<usize>,
    pub note: Option<String>,
}

fn theory_report(config: &AuditConfig, calibration: &Calibration) -> TheoryReport {
    let dimension = 1usize << config.model.qubits;
    let mut report = TheoryReport {
        mechanism: String::new(),
        epsilon: None,
        d: config.d,
        dimension,
        measurement: None,
        mu: None,
        mu_floor: MU_FLOOR,
        rank: None,
        note: None,
    };
    match config.model.noise {
        NoiseSpec::None => {
            report.mechanism = "none".into();
            report.note = Some("no noise channel: privacy loss is unbounded".into());
        }
        NoiseSpec::Depolarizing { p, scope: Scope::Global } => {
            report.mechanism = "depolarizing_global".into();
            match theory_epsilon_depolarizing(p, config.d, dimension) {
                Ok(e) if e.is_finite() => report.epsilon = Some(e),
                Ok(_) => report.note = Some("p = 0: unbounded".into()),
                Err(e) => report.note = Some(e.to_string()),
            }
        }
        NoiseSpec::Depolarizing { scope: Scope::PerQubit, .. } => {
            report.mechanism = "depolarizing_per_qubit".into();
            report.note =
                Some("the closed form describes the global channel; no bound for per-qubit noise".into());
        }
        NoiseSpec::MeasurementShots { shots } => {
            report.mechanism = "measurement".into();
            let mu = calibration.min_outcome_probability.max(MU_FLOOR);
            let rank = dimension / 2;
            report.mu = Some(mu);
            report.rank = Some(rank);
            match theory_epsilon_measurement(shots, config.d, rank, mu, config.theory_target_delta) {
                Ok(b) => {
                    if b.epsilon < 0.0 {
                        report.note = Some(
                            "the closed form is negative at these parameters and gives no usable bound".into(),
                        );
                    }
                    report.epsilon = Some(b.epsilon);
                    report.measurement = Some(b);
                }
                Err(e) => report.note = Some(e.to_string()),
            }
        }
    }
    report
}

fn resolve_delta(config: &AuditConfig, theory: &TheoryReport) -> f64 {
    config.delta.unwrap_or(match config.model.noise {
        NoiseSpec::MeasurementShots { .. } => theory
            .measurement
            .map(|m| m.delta)
            .unwrap_or(config.theory_target_delta),
        _ => 0.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub master: u64,
    pub kappa: u64,
    pub trials: Vec<u64>,
}

/// Per-trial indicator rates and `ε̂` over growing prefixes of the trials.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialSeries {
    pub seen: Vec<f64>,
    pub unseen: Vec<f64>,
    /// Prefix lengths `2..=n`.
    pub n: Vec<usize>,
    pub p1_lower: Vec<f64>,
    pub p0_upper: Vec<f64>,
    pub epsilon_hat: Vec<f64>,
}

impl TrialSeries {
    fn from_matrix(m: &TrialMatrix, beta: f64, delta: f64) -> Result<Self> {
        let (seen, unseen) = (m.x_means(), m.y_means());
        let mut series = Self {
            seen,
            unseen,
            ..Self::default()
        };
        for j in 2..=m.trials() {
            let p1 = EmpiricalBernstein.lower(&series.seen[..j], beta / 2.0)?;
            let p0 = EmpiricalBernstein.upper(&series.unseen[..j], beta / 2.0)?;
            series.n.push(j);
            series.p1_lower.push(p1);
            series.p0_upper.push(p0);
            series.epsilon_hat.push(epsilon_hat(p1, p0, delta));
        }
        Ok(series)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyReport {
    pub d: f64,
    pub delta_conf: f64,
    pub sigma: f64,
    pub gamma: f64,
    /// Largest per-qubit trace distance over every canary pair of every trial.
    pub max_qubit_distance: f64,
    pub max_full_distance: f64,
    pub mean_full_distance: f64,
}

/// Wall-clock seconds per phase.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub calibration_s: f64,
    pub trials_s: f64,
    pub per_trial_s: f64,
    pub total_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub config: AuditConfig,
    pub seeds: SeedReport,
    pub kappa: f64,
    #[serde(flatten)]
    pub estimate: EpsilonEstimate,
    pub theory: TheoryReport,
    pub trial_means: TrialSeries,
    pub adjacency: AdjacencyReport,
    pub timings: Timings,
}

#[cfg(feature = "parallel")]
fn run_trials(
    config: &AuditConfig,
    dataset: &Dataset,
    base: &[Example],
    kappa: f64,
    workers: Option<usize>,
) -> Result<Vec<TrialOutcome>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| {
        (0..config.n)
            .into_par_iter()
            .map(|i| run_trial_with_base(i, config, dataset, base, kappa))
            .collect()
    })
}

#[cfg(not(feature = "parallel"))]
fn run_trials(
    config: &AuditConfig,
    dataset: &Dataset,
    base: &[Example],
    kappa: f64,
    _workers: Option<usize>,
) -> Result<Vec<TrialOutcome>> {
    (0..config.n)
        .map(|i| run_trial_with_base(i, config, dataset, base, kappa))
        .collect()
}

/// Runs the full audit. `workers` sizes the trial pool (`None`: all cores);
/// results do not depend on it.
pub fn audit(config: &AuditConfig, dataset: &Dataset, workers: Option<usize>) -> Result<AuditReport> {
    let start = Instant::now();
    config.validate()?;
    config.check_dataset(dataset)?;
    if config.n < 2 {
        return Err(Error::domain(format!(
            "the confidence bounds need n ≥ 2 trials, got {}",
            config.n
        )));
    }
    let calibration = calibrate_kappa(config, dataset)?;
    let calibration_s = start.elapsed().as_secs_f64();

    let trials_start = Instant::now();
    let base = encode_base(&config.model, dataset)?;
    let outcomes = run_trials(config, dataset, &base, calibration.kappa, workers)?;
    let trials_s = trials_start.elapsed().as_secs_f64();

    let matrix = TrialMatrix {
        x: outcomes.iter().map(|o| o.x.clone()).collect(),
        y: outcomes.iter().map(|o| o.y.clone()).collect(),
    };
    let theory = theory_report(config, &calibration);
    let delta = resolve_delta(config, &theory);
    let estimate = EpsilonEstimate::from_matrix(&matrix, config.beta, delta, theory.epsilon)?;
    let trial_means = TrialSeries::from_matrix(&matrix, config.beta, delta)?;

    let offsets = config.offsets()?;
    let full: Vec<f64> = outcomes.iter().flat_map(|o| o.full_distances.iter().copied()).collect();
    let adjacency = AdjacencyReport {
        d: config.d,
        delta_conf: config.delta_conf,
        sigma: offsets.sigma,
        gamma: offsets.gamma,
        max_qubit_distance: outcomes.iter().map(|o| o.max_qubit_distance).fold(0.0, f64::max),
        max_full_distance: full.iter().copied().fold(0.0, f64::max),
        mean_full_distance: full.iter().sum::<f64>() / full.len() as f64,
    };
    Ok(AuditReport {
        config: config.clone(),
        seeds: SeedReport {
            master: config.seed,
            kappa: derive_seed(config.seed, Purpose::Kappa, 0),
            trials: outcomes.iter().map(|o| o.seed).collect(),
        },
        kappa: calibration.kappa,
        estimate,
        theory,
        trial_means,
        adjacency,
        timings: Timings {
            calibration_s,
            trials_s,
            per_trial_s: trials_s / config.n as f64,
            total_s: start.elapsed().as_secs_f64(),
        },
    })
}

/// The single-canary audit: identical to [`audit`] with `K = 1`.
pub fn baseline_qdp_audit(
    config: &AuditConfig,
    dataset: &Dataset,
    workers: Option<usize>,
) -> Result<AuditReport> {
    let config = AuditConfig {
        k: 1,
        ..config.clone()
    };
    audit(&config, dataset, workers)
}
