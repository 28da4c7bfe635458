//! The `qdp-audit` command line: `audit`, `bounds`, `coverage` and `compare`.
//!
//! Every command writes one JSON document, to `--out` or stdout. Files are
//! written to a temporary sibling and renamed, so a failed run leaves nothing
//! behind. Exit codes: 0 on success, 2 on configuration errors, 1 otherwise.

mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

pub use config::{CompareConfig, DatasetSource, OutputConfig, RunConfig};

use crate::audit::{
    audit, baseline_qdp_audit, coverage, sample_complexity_estimate, theory_epsilon_depolarizing,
    theory_epsilon_measurement, trials_to_target, AuditReport, KnownMechanism,
};
use crate::encoding::{gamma_bound, sigma_bound, DEFAULT_DELTA_CONF};
use crate::rng::{derive_seed, stream, Purpose};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "qdp-audit", version, about = "Privacy audits for variational quantum classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the lifted canary audit described by a config document.
    Audit(AuditArgs),
    /// Evaluate the closed-form privacy bounds.
    Bounds(BoundsArgs),
    /// Check estimator coverage on a mechanism with known ε.
    Coverage(CoverageArgs),
    /// Trials needed to reach a target ε̂ for several K.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for trials.
    #[arg(long, env = "QDP_AUDIT_WORKERS")]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// Also export the per-trial series as CSV.
    #[arg(long)]
    series: Option<PathBuf>,
    /// Run the single-canary baseline (K = 1) instead.
    #[arg(long)]
    baseline: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Trace-distance threshold.
    #[arg(long, default_value_t = 0.1)]
    d: f64,
    #[arg(long, default_value_t = DEFAULT_DELTA_CONF)]
    delta_conf: f64,
    /// Depolarizing probability.
    #[arg(long)]
    p: Option<f64>,
    /// Hilbert-space dimension; defaults to 2^qubits.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 4)]
    qubits: usize,
    /// Measurement shots N.
    #[arg(long)]
    shots: Option<u64>,
    /// Minimum outcome probability μ.
    #[arg(long)]
    mu: Option<f64>,
    /// Projector rank r; defaults to dim/2.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 1e-5)]
    target_delta: f64,
    /// Rate gap Δ for the sample-complexity estimate.
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CoverageArgs {
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.3)]
    p0: f64,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value_t = 16)]
    k: usize,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Document with a `[compare]` section (and `[audit]` when `qml = true`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated K values.
    #[arg(long, value_delimiter = ',')]
    k_values: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    target: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Audit(a) => cmd_audit(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Coverage(a) => cmd_coverage(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("output path {} has no file name", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
        .and_then(|_| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(result?)
}

fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    match out {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Runs the audit a config describes and returns the report document: the
/// audit report with `config` replaced by the full resolved run config.
pub fn audit_document(cfg: &RunConfig, workers: Option<usize>, baseline: bool) -> Result<Value> {
    let audit_cfg = cfg.audit_config()?;
    let dataset = cfg.dataset.load(audit_cfg.model.qubits)?;
    eprintln!(
        "auditing: n = {}, K = {}, {} records, {} qubits",
        audit_cfg.n,
        if baseline { 1 } else { audit_cfg.k },
        dataset.len(),
        audit_cfg.model.qubits
    );
    let workers = workers.or(cfg.workers);
    let report = if baseline {
        baseline_qdp_audit(audit_cfg, &dataset, workers)?
    } else {
        audit(audit_cfg, &dataset, workers)?
    };
    let mut resolved = cfg.clone();
    resolved.audit = Some(report.config.clone());
    let mut doc = serde_json::to_value(&report).expect("serializable report");
    doc["config"] = serde_json::to_value(&resolved).expect("serializable config");
    doc["dataset"] = json!({
        "records": dataset.len(),
        "features": dataset.feature_names,
        "classes": dataset.class_names,
        "label_counts": dataset.label_counts(),
    });
    Ok(doc)
}

/// CSV with one row per trial: the trial's seen/unseen rates and the bounds
/// and `ε̂` over the first `n` trials (empty for `n = 1`).
pub fn series_csv(report: &AuditReport) -> Result<Vec<u8>> {
    let s = &report.trial_means;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["n", "seen", "unseen", "p1_lower", "p0_upper", "epsilon_hat"])
        .map_err(io)?;
    for i in 0..s.seen.len() {
        let running = |v: &[f64]| if i == 0 { String::new() } else { v[i - 1].to_string() };
        w.write_record([
            (i + 1).to_string(),
            s.seen[i].to_string(),
            s.unseen[i].to_string(),
            running(&s.p1_lower),
            running(&s.p0_upper),
            running(&s.epsilon_hat),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn cmd_audit(args: AuditArgs) -> Result<()> {
    let mut cfg = RunConfig::load(&args.config)?;
    {
        let audit_cfg = cfg
            .audit
            .as_mut()
            .ok_or_else(|| Error::Config("missing [audit] section".into()))?;
        if let Some(seed) = args.seed {
            audit_cfg.seed = seed;
        }
        if let Some(n) = args.n {
            audit_cfg.n = n;
        }
        if let Some(k) = args.k {
            audit_cfg.k = k;
        }
        if let Some(beta) = args.beta {
            audit_cfg.beta = beta;
        }
    }
    if let Some(out) = args.common.out {
        cfg.output.report = Some(out);
    }
    if let Some(series) = args.series {
        cfg.output.series_csv = Some(series);
    }
    let doc = audit_document(&cfg, args.common.workers, args.baseline)?;
    let series = match &cfg.output.series_csv {
        Some(path) => {
            let report: AuditReport = serde_json::from_value(with_audit_config(&doc))
                .expect("report round-trips");
            Some((path.clone(), series_csv(&report)?))
        }
        None => None,
    };
    emit(&doc, cfg.output.report.as_deref())?;
    if let Some((path, bytes)) = series {
        write_atomic(&path, &bytes)?;
        eprintln!("wrote {}", path.display());
    }
    eprintln!(
        "epsilon_hat = {:.6} (p1_lower = {:.4}, p0_upper = {:.4})",
        doc["epsilon_hat"].as_f64().unwrap_or(f64::NAN),
        doc["p1_lower"].as_f64().unwrap_or(f64::NAN),
        doc["p0_upper"].as_f64().unwrap_or(f64::NAN),
    );
    Ok(())
}

/// The document with `config` narrowed back to the audit section.
fn with_audit_config(doc: &Value) -> Value {
    let mut v = doc.clone();
    v["config"] = doc["config"]["audit"].clone();
    v
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    let dim = args.dim.unwrap_or(1usize << args.qubits.min(30));
    let mut doc = json!({
        "inputs": {
            "d": args.d,
            "delta_conf": args.delta_conf,
            "dim": dim,
        },
        "offsets": {
            "sigma_max": sigma_bound(args.d, args.delta_conf)?,
            "gamma": gamma_bound(args.d)?,
        },
    });
    if let Some(p) = args.p {
        let eps = theory_epsilon_depolarizing(p, args.d, dim)?;
        doc["inputs"]["p"] = json!(p);
        doc["depolarizing"] = json!({ "epsilon": eps.is_finite().then_some(eps) });
    }
    match (args.shots, args.mu) {
        (Some(shots), Some(mu)) => {
            let rank = args.rank.unwrap_or(dim / 2);
            let b = theory_epsilon_measurement(shots, args.d, rank, mu, args.target_delta)?;
            doc["inputs"]["shots"] = json!(shots);
            doc["inputs"]["mu"] = json!(mu);
            doc["inputs"]["rank"] = json!(rank);
            doc["inputs"]["target_delta"] = json!(args.target_delta);
            doc["measurement"] = serde_json::to_value(b).expect("serializable");
        }
        (None, None) => {}
        _ => return Err(Error::Config("the measurement bound needs both --shots and --mu".into())),
    }
    if let Some(gap) = args.gap {
        doc["inputs"]["gap"] = json!(gap);
        doc["inputs"]["beta"] = json!(args.beta);
        doc["inputs"]["k"] = json!(args.k);
        doc["sample_complexity"] = json!(sample_complexity_estimate(gap, args.beta, args.k)?);
    }
    emit(&doc, args.out.as_deref())
}

fn cmd_coverage(args: CoverageArgs) -> Result<()> {
    let mech = KnownMechanism::new(args.epsilon, args.p0)?;
    let summary = coverage(&mech, args.n, args.k, args.beta, args.reps, args.seed)?;
    eprintln!(
        "violations: {} of {} (rate {:.4}, beta {})",
        summary.violations, summary.replications, summary.violation_rate, args.beta
    );
    emit(&summary, args.out.as_deref())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub k: usize,
    pub mean_trials_to_target: f64,
    /// Replications that hit `max_trials` without reaching the target.
    pub censored: usize,
    pub sample_complexity_estimate: u64,
    pub wall_clock_s: f64,
    pub qml: Option<Value>,
}

/// Trials-to-target per `K` on the synthetic mechanism, optionally with one
/// classifier audit per `K`. Replication `r` uses the same seed for every `K`.
pub fn compare_rows(
    cfg: &CompareConfig,
    run: Option<&RunConfig>,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<CompareRow>> {
    cfg.validate()?;
    let mech = KnownMechanism::new(cfg.epsilon_true, cfg.p0)?;
    let gap = (mech.p1() - mech.p0).max(f64::MIN_POSITIVE);
    cfg.k_values
        .iter()
        .map(|&k| {
            let start = Instant::now();
            let counts: Vec<usize> = (0..cfg.replications as u64)
                .map(|r| {
                    let mut rng = stream(derive_seed(seed, Purpose::Replication, r));
                    trials_to_target(&mech, k, cfg.beta, cfg.target, cfg.max_trials, &mut rng)
                })
                .collect();
            let wall_clock_s = start.elapsed().as_secs_f64();
            let qml = match (cfg.qml, run) {
                (true, Some(run)) => {
                    let mut run = run.clone();
                    if let Some(a) = run.audit.as_mut() {
                        a.k = k;
                    }
                    let doc = audit_document(&run, workers, false)?;
                    Some(json!({
                        "epsilon_hat": doc["epsilon_hat"],
                        "per_trial_s": doc["timings"]["per_trial_s"],
                        "total_s": doc["timings"]["total_s"],
                    }))
                }
                (true, None) => {
                    return Err(Error::Config("qml comparison needs a config with [audit]".into()))
                }
                _ => None,
            };
            Ok(CompareRow {
                k,
                mean_trials_to_target: counts.iter().sum::<usize>() as f64 / counts.len().max(1) as f64,
                censored: counts.iter().filter(|&&c| c >= cfg.max_trials).count(),
                sample_complexity_estimate: sample_complexity_estimate(gap.min(1.0), cfg.beta, k)?,
                wall_clock_s,
                qml,
            })
        })
        .collect()
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let run = args.config.as_deref().map(RunConfig::load).transpose()?;
    let mut cfg = run.as_ref().and_then(|r| r.compare.clone()).unwrap_or_default();
    if let Some(k) = args.k_values {
        cfg.k_values = k;
    }
    if let Some(reps) = args.reps {
        cfg.replications = reps;
    }
    if let Some(target) = args.target {
        cfg.target = target;
    }
    let rows = compare_rows(&cfg, run.as_ref(), args.seed, args.common.workers)?;
    eprintln!("{:>6} {:>14} {:>10} {:>12}", "K", "mean trials", "estimate", "seconds");
    for r in &rows {
        eprintln!(
            "{:>6} {:>14.2} {:>10} {:>12.4}",
            r.k, r.mean_trials_to_target, r.sample_complexity_estimate, r.wall_clock_s
        );
    }
    let out = args
        .common
        .out
        .or_else(|| run.as_ref().and_then(|r| r.output.report.clone()));
    emit(&json!({ "compare": cfg, "seed": args.seed, "rows": rows }), out.as_deref())
}
