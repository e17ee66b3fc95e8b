//! Sample-complexity sweeps.
//!
//! `H^perp` only grows with more samples, so each trial records the first
//! sample index at which the generated subgroup reaches the true `H^perp`.
//! The solver with `m` samples succeeds exactly when that hit time is `<= m`,
//! which gives the success rate at every `m` from one run per trial.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_instance, trial_rng, InstanceSpec, Outcome, Rate};
use crate::charpovm::{q_distribution, CharDistribution, Copies, Family};
use crate::error::{Error, Result};
use crate::fgroup::Subgroup;
use crate::hsp::sample_count;

pub const SWEEP_HEADER: &str = "family,n,d,epsilon,m_theory,m_empirical_95,success_at_m_theory";

const INSTANCE_PURPOSE: u64 = 0;
const TRIAL_PURPOSE: u64 = 1 << 32;

fn default_delta() -> f64 {
    0.05
}

fn default_cap_factor() -> f64 {
    4.0
}

fn default_slope_tolerance() -> f64 {
    0.25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub master_seed: u64,
    pub trials: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub points: Vec<InstanceSpec>,
    /// Trials stop after `cap_factor * m_theory` samples.
    #[serde(default = "default_cap_factor")]
    pub cap_factor: f64,
    /// Relative tolerance on fitted log-log slopes.
    #[serde(default = "default_slope_tolerance")]
    pub slope_tolerance: f64,
    #[serde(default)]
    pub output_dir: Option<std::path::PathBuf>,
    #[serde(default)]
    pub record_timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub instance: InstanceSpec,
    pub family: String,
    pub n: usize,
    pub d: u64,
    /// Gap handed to the learner (square root of the purity gap for cuts).
    pub epsilon: f64,
    /// Gap of the representation itself.
    pub epsilon_eff: f64,
    pub m_theory: u64,
    /// `None` when fewer than 95% of trials succeed within the cap.
    pub m_empirical_95: Option<u64>,
    pub success_at_m_theory: Rate,
    pub hit_times: Vec<Option<u64>>,
}

impl SweepRow {
    fn csv_line(&self) -> String {
        let m95 = self
            .m_empirical_95
            .map_or_else(|| "NA".to_string(), |m| m.to_string());
        format!(
            "{},{},{},{},{},{},{}",
            self.family,
            self.n,
            self.d,
            self.epsilon,
            self.m_theory,
            m95,
            self.success_at_m_theory.rate
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub instance: String,
    pub family: String,
    pub n: usize,
    pub points: usize,
    pub slope: f64,
    pub expected: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub instance: InstanceSpec,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SweepRecords {
    rows: Vec<SweepRow>,
    fits: Vec<SlopeFit>,
    skipped: Vec<SkippedPoint>,
}

fn family_name(f: &Family) -> &'static str {
    match f {
        Family::WeylSymplectic { .. } => "weyl",
        Family::SwapCut { .. } => "cut",
        Family::Translation { .. } => "translation",
        Family::BlockedWeyl { .. } => "blocked_weyl",
        Family::ZOnly { .. } => "z_only",
    }
}

/// Expected exponent of `m` in `epsilon`.
fn expected_slope(family: &str) -> Option<f64> {
    match family {
        "weyl" | "translation" => Some(-1.0),
        "cut" => Some(-2.0),
        _ => None,
    }
}

/// First sample index (1-based, 0 when `H^perp` is trivial) at which the
/// generated subgroup reaches `target`; `None` if not reached within `cap`.
pub fn hit_times(
    q: &CharDistribution,
    target: &Subgroup,
    cap: u64,
    master_seed: u64,
    purpose: u64,
    trials: usize,
) -> Result<Vec<Option<u64>>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, purpose, t);
            let mut h_perp = Subgroup::trivial(q.spec());
            if h_perp.order() == target.order() {
                return Ok(Some(0));
            }
            for i in 1..=cap {
                h_perp = h_perp.extend(&q.sample_label(&mut rng))?;
                if h_perp.order() == target.order() {
                    return Ok(Some(i));
                }
            }
            Ok(None)
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn quantile_95(hits: &[Option<u64>]) -> Option<u64> {
    let mut found: Vec<u64> = hits.iter().flatten().copied().collect();
    found.sort_unstable();
    let need = (0.95 * hits.len() as f64).ceil() as usize;
    (need >= 1 && found.len() >= need).then(|| found[need - 1])
}

fn run_point(cfg: &SweepConfig, index: usize, spec: &InstanceSpec) -> Result<SweepRow> {
    let mut rng = trial_rng(cfg.master_seed, INSTANCE_PURPOSE, index as u64);
    let inst = generate_instance(spec, None, &mut rng)?;
    let q = q_distribution(&inst.rep, &Copies::Identical(&inst.state))?;
    let target = inst.ground_truth.annihilator();
    if inst.gap.epsilon_eff <= 0.0 {
        return Err(Error::PromiseViolation(format!(
            "instance {spec:?} has no gap"
        )));
    }
    let m_theory = sample_count(inst.rep.spec(), inst.gap.epsilon_eff, cfg.delta);
    let cap = (cfg.cap_factor * m_theory as f64).ceil() as u64;
    let hits = hit_times(
        &q,
        &target,
        cap,
        cfg.master_seed,
        TRIAL_PURPOSE + index as u64,
        cfg.trials,
    )?;
    let successes = hits
        .iter()
        .filter(|h| h.is_some_and(|m| m <= m_theory))
        .count() as u64;
    let (n, d) = inst.rep.state_shape();
    Ok(SweepRow {
        instance: spec.clone(),
        family: family_name(inst.rep.family()).into(),
        n,
        d,
        epsilon: inst.learner_epsilon(),
        epsilon_eff: inst.gap.epsilon_eff,
        m_theory,
        m_empirical_95: quantile_95(&hits),
        success_at_m_theory: Rate::new(successes, cfg.trials as u64),
        hit_times: hits,
    })
}

fn instance_kind(spec: &InstanceSpec) -> String {
    serde_json::to_value(spec)
        .ok()
        .and_then(|v| v["family"].as_str().map(String::from))
        .unwrap_or_default()
}

/// One fit per instance kind and size, so fixed-gap instances sharing a
/// representation do not enter a gap sweep.
fn fit_slopes(rows: &[SweepRow], tolerance: f64) -> Vec<SlopeFit> {
    let mut keys: Vec<(String, usize)> = rows
        .iter()
        .map(|r| (instance_kind(&r.instance), r.n))
        .collect();
    keys.sort();
    keys.dedup();
    let mut fits = Vec::new();
    for (kind, n) in keys {
        let group: Vec<&SweepRow> = rows
            .iter()
            .filter(|r| instance_kind(&r.instance) == kind && r.n == n)
            .collect();
        let family = group[0].family.clone();
        let Some(expected) = expected_slope(&family) else {
            continue;
        };
        let pts: Vec<(f64, f64)> = group
            .iter()
            .filter_map(|r| {
                r.m_empirical_95
                    .filter(|&m| m > 0)
                    .map(|m| (r.epsilon, m as f64))
            })
            .collect();
        let mut eps: Vec<f64> = pts.iter().map(|p| p.0).collect();
        eps.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        if eps.len() < 3 {
            continue;
        }
        if let Some(slope) = loglog_slope(&pts) {
            let within_tolerance = ((slope - expected) / expected).abs() <= tolerance;
            fits.push(SlopeFit {
                instance: kind,
                family,
                n,
                points: pts.len(),
                slope,
                expected,
                within_tolerance,
            });
        }
    }
    fits
}

pub(super) fn run(cfg: &SweepConfig) -> Result<Outcome> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut failures = Vec::new();
    for (i, spec) in cfg.points.iter().enumerate() {
        match run_point(cfg, i, spec) {
            Ok(row) => rows.push(row),
            Err(Error::Capacity { needed, limit }) => skipped.push(SkippedPoint {
                instance: spec.clone(),
                reason: format!("capacity exceeded: need {needed}, limit {limit}"),
            }),
            Err(e) => return Err(e),
        }
    }
    for r in &rows {
        match r.m_empirical_95 {
            Some(m) if m <= r.m_theory => {}
            Some(m) => failures.push(format!(
                "{} n={} eps={}: m_empirical_95 {m} > m_theory {}",
                r.family, r.n, r.epsilon, r.m_theory
            )),
            None => failures.push(format!(
                "{} n={} eps={}: under 95% success within the cap",
                r.family, r.n, r.epsilon
            )),
        }
    }
    let fits = fit_slopes(&rows, cfg.slope_tolerance);
    for f in fits.iter().filter(|f| !f.within_tolerance) {
        failures.push(format!(
            "{} n={}: slope {:.3} vs expected {}",
            f.instance, f.n, f.slope, f.expected
        ));
    }
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv_line());
        csv.push('\n');
    }
    let records = serde_json::to_value(SweepRecords {
        rows,
        fits,
        skipped,
    })?;
    Ok(Outcome {
        failures,
        records,
        files: vec![("sweep.csv".into(), csv)],
    })
}

/// Runs a sweep without writing files.
pub fn run_sample_complexity_sweep(cfg: &SweepConfig) -> Result<super::ExperimentReport> {
    let mut cfg = cfg.clone();
    cfg.output_dir = None;
    super::run_experiment(&super::ExperimentConfig::Sweep(cfg))
}
