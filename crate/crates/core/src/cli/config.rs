//! Run configuration documents.
//!
//! A run is described by one TOML (or JSON) document. Unknown keys are
//! rejected; command-line flags override document values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audit::AuditConfig;
use crate::data::{iris_binary, load_csv, synth_gaussians, Dataset};
use crate::rng::{derived_stream, Purpose};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// The bundled setosa/versicolor subset of Iris.
    Iris {},
    Csv {
        path: PathBuf,
        label_column: String,
        /// Two class names mapped to labels 0 and 1.
        #[serde(default)]
        classes: Option<[String; 2]>,
    },
    /// Two Gaussian classes with one feature per model qubit.
    Synthetic {
        per_class: usize,
        #[serde(default = "default_separation")]
        separation: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Iris {}
    }
}

fn default_separation() -> f64 {
    2.0
}

impl DatasetSource {
    pub fn load(&self, features: usize) -> Result<Dataset> {
        match self {
            DatasetSource::Iris {} => Ok(iris_binary()),
            DatasetSource::Csv {
                path,
                label_column,
                classes,
            } => {
                let filter = classes.as_ref().map(|[a, b]| [a.as_str(), b.as_str()]);
                load_csv(path, label_column, filter).map_err(|e| match e {
                    Error::Io(io) => {
                        Error::Config(format!("cannot read dataset {}: {io}", path.display()))
                    }
                    other => other,
                })
            }
            DatasetSource::Synthetic {
                per_class,
                separation,
                seed,
            } => synth_gaussians(
                features,
                *per_class,
                *separation,
                &mut derived_stream(*seed, Purpose::Data, 0),
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// JSON report path; stdout when absent.
    #[serde(default)]
    pub report: Option<PathBuf>,
    /// Optional CSV of the per-trial series.
    #[serde(default)]
    pub series_csv: Option<PathBuf>,
}

/// Settings for the `compare` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default = "default_k_values")]
    pub k_values: Vec<usize>,
    /// `ε̂` each replication has to reach.
    #[serde(default = "default_target")]
    pub target: f64,
    #[serde(default = "default_epsilon_true")]
    pub epsilon_true: f64,
    #[serde(default = "default_p0")]
    pub p0: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_max_trials")]
    pub max_trials: usize,
    /// Also run the classifier audit once per `K`.
    #[serde(default)]
    pub qml: bool,
}

fn default_k_values() -> Vec<usize> {
    vec![1, 4, 16]
}
fn default_target() -> f64 {
    0.5
}
fn default_epsilon_true() -> f64 {
    3f64.ln()
}
fn default_p0() -> f64 {
    0.3
}
fn default_beta() -> f64 {
    0.05
}
fn default_replications() -> usize {
    50
}
fn default_max_trials() -> usize {
    100_000
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            k_values: default_k_values(),
            target: default_target(),
            epsilon_true: default_epsilon_true(),
            p0: default_p0(),
            beta: default_beta(),
            replications: default_replications(),
            max_trials: default_max_trials(),
            qml: false,
        }
    }
}

impl CompareConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() || self.k_values.contains(&0) {
            return Err(Error::Config("k_values must be a nonempty list of positive integers".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("beta = {} must lie in (0, 1)", self.beta)));
        }
        if self.max_trials < 2 {
            return Err(Error::Config("max_trials must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub dataset: DatasetSource,
    #[serde(default)]
    pub audit: Option<AuditConfig>,
    #[serde(default)]
    pub compare: Option<CompareConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Trial pool size; machine parallelism when absent.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl RunConfig {
    /// Reads a `.json` or TOML document. Relative dataset and output paths
    /// are resolved against the document's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let DatasetSource::Csv { path, .. } = &mut self.dataset {
            join(path);
        }
        if let Some(p) = &mut self.output.report {
            join(p);
        }
        if let Some(p) = &mut self.output.series_csv {
            join(p);
        }
    }

    /// The `[audit]` section, validated.
    pub fn audit_config(&self) -> Result<&AuditConfig> {
        let cfg = self
            .audit
            .as_ref()
            .ok_or_else(|| Error::Config("missing [audit] section".into()))?;
        cfg.validate().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [audit]
        n = 4
        k = 2
        d = 0.1
        beta = 0.05
        [audit.model]
        qubits = 4
        noise = { kind = "depolarizing", p = 0.01 }
        [audit.train]
        epochs = 5
        learning_rate = 0.1
    "#;

    #[test]
    fn parses_minimal_document() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.dataset, DatasetSource::Iris {});
        let audit = cfg.audit_config().unwrap();
        assert_eq!(audit.calibration_canaries, 64);
        assert_eq!(audit.model.noise.depolarizing_p(), Some(0.01));
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = MINIMAL.replace("beta = 0.05", "beta = 0.05\nbogus = 1");
        assert!(matches!(RunConfig::from_toml(&bad), Err(Error::Config(_))));
        let bad = format!("{MINIMAL}\n[dataset]\nsource = \"iris\"\nextra = 2\n");
        assert!(RunConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let bad = MINIMAL.replace("p = 0.01", "p = 2.0");
        let cfg = RunConfig::from_toml(&bad).unwrap();
        assert!(matches!(cfg.audit_config(), Err(Error::Config(_))));
    }

    #[test]
    fn json_round_trip() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&json).unwrap(), cfg);
    }

    #[test]
    fn kappa_rule_forms() {
        let fixed = MINIMAL.replace("beta = 0.05", "beta = 0.05\nkappa = { fixed = 0.6 }");
        let cfg = RunConfig::from_toml(&fixed).unwrap();
        assert_eq!(cfg.audit.unwrap().kappa, crate::audit::KappaRule::Fixed(0.6));
        let median = MINIMAL.replace("beta = 0.05", "beta = 0.05\nkappa = \"calibrated_median\"");
        assert!(RunConfig::from_toml(&median).is_ok());
    }
}
