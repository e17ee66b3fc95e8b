//! Seeded experiment runner: sample-complexity sweeps, lemma checks,
//! oracle-equivalence checks and the mixed-state demo.
//!
//! Every trial owns a `ChaCha8Rng` derived from the master seed, a purpose
//! tag and the trial index, so results do not depend on thread scheduling.

mod instances;
mod lemmas;
mod oracle;
mod sweep;

pub use instances::{
    generate_instance, random_lagrangian, random_stabilizer_state, Instance, InstanceMeta,
    InstanceSpec, RETRY_CAP,
};
pub use lemmas::{
    run_lemma_checks, FaultInjection, LemmaConfig, LemmaRecord, ReplayArtifact, TailConfig,
    TailElement, TailRecord,
};
pub use oracle::{
    chi_square_p_value, run_oracle_equivalence, NamedState, OracleCase, OracleConfig, OracleRecord,
    Route,
};
pub use sweep::{
    hit_times, loglog_slope, run_sample_complexity_sweep, SkippedPoint, SlopeFit, SweepConfig,
    SweepRow, SWEEP_HEADER,
};

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::apps::{mixed_state_failure_demo, MixedDemoReport};
use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "experiment/1";

/// RNG for trial `index` of the task tagged `purpose`.
pub fn trial_rng(master_seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut rng =
        ChaCha8Rng::seed_from_u64(master_seed ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

/// Wilson score interval at 95% confidence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl Rate {
    pub fn new(successes: u64, trials: u64) -> Self {
        let (low, high) = wilson_interval(successes, trials);
        let rate = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        Self {
            successes,
            trials,
            rate,
            wilson_low: low,
            wilson_high: high,
        }
    }
}

pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureDemoConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub record_timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Sweep(SweepConfig),
    LemmaCheck(LemmaConfig),
    OracleEquivalence(OracleConfig),
    FailureDemo(FailureDemoConfig),
}

impl ExperimentConfig {
    /// Parses a JSON config. Errors name the offending field and, where it
    /// can be found in the text, its line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        // replay artifacts carry their config in a `config` field
        if value.get("kind").is_none() && value.get("config").is_some_and(|c| c.is_object()) {
            value = value["config"].take();
        }
        let kind = match value.as_object_mut().and_then(|m| m.remove("kind")) {
            Some(serde_json::Value::String(k)) => k,
            Some(other) => {
                return Err(Error::Config(format!(
                    "`kind` must be a string, got {other}"
                )))
            }
            None => return Err(Error::Config("missing field `kind`".into())),
        };
        match kind.as_str() {
            "sweep" => typed(text, value).map(ExperimentConfig::Sweep),
            "lemma-check" => typed(text, value).map(ExperimentConfig::LemmaCheck),
            "oracle-equivalence" => typed(text, value).map(ExperimentConfig::OracleEquivalence),
            "failure-demo" => typed(text, value).map(ExperimentConfig::FailureDemo),
            other => Err(Error::Config(format!(
                "unknown kind `{other}`, expected one of `sweep`, `lemma-check`, `oracle-equivalence`, `failure-demo`"
            ))),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn output_dir(&self) -> Option<&Path> {
        match self {
            ExperimentConfig::Sweep(c) => c.output_dir.as_deref(),
            ExperimentConfig::LemmaCheck(c) => c.output_dir.as_deref(),
            ExperimentConfig::OracleEquivalence(c) => c.output_dir.as_deref(),
            ExperimentConfig::FailureDemo(c) => c.output_dir.as_deref(),
        }
    }

    fn record_timing(&self) -> bool {
        match self {
            ExperimentConfig::Sweep(c) => c.record_timing,
            ExperimentConfig::LemmaCheck(c) => c.record_timing,
            ExperimentConfig::OracleEquivalence(c) => c.record_timing,
            ExperimentConfig::FailureDemo(c) => c.record_timing,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub passed: bool,
    /// Human-readable reasons for failure.
    pub failures: Vec<String>,
    pub records: serde_json::Value,
    /// Files written besides the report, relative to the output directory.
    pub artifacts: Vec<String>,
    /// Only present with `record_timing`, which breaks byte-identical output.
    pub wall_clock_ms: Option<u64>,
}

/// Output of one experiment before it is wrapped into a report.
pub(crate) struct Outcome {
    pub failures: Vec<String>,
    pub records: serde_json::Value,
    /// `(file name, contents)` pairs to write next to the report.
    pub files: Vec<(String, String)>,
}

/// Runs the experiment and writes `report.json` plus any artifacts into the
/// configured output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let outcome = match config {
        ExperimentConfig::Sweep(c) => sweep::run(c)?,
        ExperimentConfig::LemmaCheck(c) => lemmas::run(c)?,
        ExperimentConfig::OracleEquivalence(c) => oracle::run(c)?,
        ExperimentConfig::FailureDemo(_) => failure_demo()?,
    };
    let wall_clock_ms = config
        .record_timing()
        .then(|| start.elapsed().as_millis() as u64);
    let report = ExperimentReport {
        schema: REPORT_SCHEMA.into(),
        config: config.clone(),
        passed: outcome.failures.is_empty(),
        failures: outcome.failures,
        records: outcome.records,
        artifacts: outcome.files.iter().map(|(name, _)| name.clone()).collect(),
        wall_clock_ms,
    };
    if let Some(dir) = config.output_dir() {
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &outcome.files {
            std::fs::write(dir.join(name), contents)?;
        }
        std::fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(&report)? + "\n",
        )?;
    }
    Ok(report)
}

fn typed<T: serde::de::DeserializeOwned>(text: &str, value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        // the field the error is about: the last path segment, or the
        // unknown field named in the message
        let field = inner
            .strip_prefix("unknown field `")
            .and_then(|rest| rest.split('`').next())
            .map(String::from)
            .or_else(|| {
                path.rsplit('.')
                    .find(|seg| !seg.starts_with('[') && *seg != "?")
                    .map(String::from)
            });
        let at = field.as_deref().and_then(|f| locate(text, f));
        let at = at.map_or(String::new(), |(l, c)| format!(" at line {l} column {c}"));
        Error::Config(format!("{path}: {inner}{at}"))
    })
}

/// Line and column of the first occurrence of `"field"` in `text`.
fn locate(text: &str, field: &str) -> Option<(usize, usize)> {
    let offset = text.find(&format!("\"{field}\""))?;
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = offset - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    Some((line, column))
}

fn failure_demo() -> Result<Outcome> {
    let demo: MixedDemoReport = mixed_state_failure_demo()?;
    let failures = if demo.demonstrates_failure() {
        Vec::new()
    } else {
        vec![format!(
            "mixed-state demo did not separate the cases: {demo:?}"
        )]
    };
    Ok(Outcome {
        failures,
        records: serde_json::to_value(&demo)?,
        files: Vec::new(),
    })
}
