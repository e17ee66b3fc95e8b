//! Exhaustive checks of the character-sum identity, the subgroup-mass
//! identity, anti-concentration and the two output properties of the solver.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_instance, trial_rng, Instance, InstanceSpec, Outcome, Rate};
use crate::charpovm::{q_from_expectations, CharDistribution, Copies, CopyProvider};
use crate::error::{Error, Result};
use crate::fgroup::{enumerate_supergroups, root_of_unity, GroupElement, GroupSpec};
use crate::hsp::{sample_count, solve, SolveOptions, StateHSPInstance};

const INSTANCE_PURPOSE: u64 = 2 << 32;
const TAIL_PURPOSE: u64 = 3 << 32;

fn one() -> usize {
    1
}

fn default_tolerance() -> f64 {
    1e-9
}

fn default_delta() -> f64 {
    0.05
}

fn default_bound() -> u64 {
    1 << 12
}

fn default_sigmas() -> f64 {
    3.0
}

/// Deliberate corruption of the distribution under test, used to exercise
/// the failure path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultInjection {
    /// Factor applied to every non-identity expectation before forming `q`.
    pub scale: f64,
}

/// Monte-Carlo check of `Pr(g in H) <= ((1 + |<R(g)>|)/2)^m` for every
/// `g` outside the exact symmetry group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    pub instance: InstanceSpec,
    pub m: u64,
    pub trials: usize,
    #[serde(default = "default_sigmas")]
    pub sigmas: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaConfig {
    pub master_seed: u64,
    pub instances: Vec<InstanceSpec>,
    /// Random instances per entry of `instances`.
    #[serde(default = "one")]
    pub repeats: usize,
    /// Explicit per-instance seeds, in `instances x repeats` order.
    #[serde(default)]
    pub instance_seeds: Option<Vec<u64>>,
    /// Solver runs per instance for the exact-symmetry containment check.
    #[serde(default)]
    pub solve_trials: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_bound")]
    pub subgroup_bound: u64,
    #[serde(default)]
    pub tail: Option<TailConfig>,
    #[serde(default)]
    pub fault_injection: Option<FaultInjection>,
    #[serde(default)]
    pub output_dir: Option<std::path::PathBuf>,
    #[serde(default)]
    pub record_timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRecord {
    pub instance: InstanceSpec,
    pub seed: u64,
    pub group_order: u64,
    pub h_order: u64,
    pub epsilon_eff: f64,
    /// `max_lambda |sum_g chi_lambda(g) - |G| [lambda = 0]|`.
    pub orthogonality_max_deviation: f64,
    /// `|q(H^perp) - 1|`.
    pub support_deviation: f64,
    pub supergroups: usize,
    /// `max_K |q(K^perp) - mean_{k in K} <R(k)>|` over `K >= H`.
    pub subgroup_mass_max_deviation: f64,
    /// `max_{K > H} q(K^perp) - (1 - epsilon_eff/2)`; `None` when `H = G`.
    pub gap_margin: Option<f64>,
    pub solve_runs: usize,
    /// Runs whose output misses an exact symmetry.
    pub containment_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailElement {
    pub g: GroupElement,
    pub expectation_abs: f64,
    pub bound: f64,
    pub empirical: Rate,
    /// `rate - bound - sigmas * sigma`; positive means a violation.
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRecord {
    pub instance: InstanceSpec,
    pub m: u64,
    pub elements: Vec<TailElement>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct LemmaRecords {
    instances: Vec<LemmaRecord>,
    tail: Option<TailRecord>,
}

/// Standalone reproduction of one failed check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayArtifact {
    pub check: String,
    pub value: f64,
    pub threshold: f64,
    pub state: crate::qstate::PureState,
    pub config: super::ExperimentConfig,
}

fn orthogonality_deviation(spec: &GroupSpec) -> f64 {
    let order = spec.order() as f64;
    let l = spec.phase_denominator();
    let elements: Vec<GroupElement> = spec.elements().collect();
    elements
        .iter()
        .map(|lambda| {
            let sum: Complex64 = elements
                .iter()
                .map(|g| root_of_unity(spec.pairing_exponent(lambda, g), l))
                .sum();
            let want = if lambda.is_zero() { order } else { 0.0 };
            (sum - want).norm()
        })
        .fold(0.0, f64::max)
}

fn injected(
    spec: &GroupSpec,
    e: &[Complex64],
    fault: Option<&FaultInjection>,
) -> Result<CharDistribution> {
    match fault {
        None => q_from_expectations(spec, e),
        Some(f) => {
            let scaled: Vec<Complex64> = e
                .iter()
                .enumerate()
                .map(|(i, v)| if i == 0 { *v } else { v * f.scale })
                .collect();
            q_from_expectations(spec, &scaled)
        }
    }
}

fn check_instance(cfg: &LemmaConfig, inst: &Instance, seed: u64) -> Result<LemmaRecord> {
    let spec = inst.rep.spec();
    let e = inst.rep.expectations(&Copies::Identical(&inst.state))?;
    let q = injected(spec, &e, cfg.fault_injection.as_ref())?;
    let h = &inst.gap.h_exact;
    let supergroups = enumerate_supergroups(h, cfg.subgroup_bound)?;
    let mut subgroup_mass = 0.0f64;
    let mut gap_margin: Option<f64> = None;
    for k in &supergroups {
        let mean: Complex64 = k
            .elements()
            .iter()
            .map(|g| e[spec.index_of(g)])
            .sum::<Complex64>()
            / k.order() as f64;
        let mass = q.mass(&k.annihilator());
        subgroup_mass = subgroup_mass.max((mass - mean).norm());
        if k.order() > h.order() {
            let margin = mass - (1.0 - inst.gap.epsilon_eff / 2.0);
            gap_margin = Some(gap_margin.map_or(margin, |m| m.max(margin)));
        }
    }
    let m = sample_count(spec, inst.gap.epsilon_eff.max(f64::MIN_POSITIVE), cfg.delta);
    let violations = (0..cfg.solve_trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut hsp = StateHSPInstance::new(
                inst.rep.clone(),
                CopyProvider::identical(inst.state.clone()),
                inst.gap.epsilon_eff.clamp(1e-12, 1.0),
                cfg.delta,
            )?;
            let opts = SolveOptions {
                samples: Some(m),
                ..Default::default()
            };
            let report = solve(&mut hsp, &opts, seed.wrapping_add(1 + t))?;
            Ok(!h.is_subgroup_of(&report.h))
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(LemmaRecord {
        instance: inst.spec.clone(),
        seed,
        group_order: spec.order(),
        h_order: h.order(),
        epsilon_eff: inst.gap.epsilon_eff,
        orthogonality_max_deviation: orthogonality_deviation(spec),
        support_deviation: (q.mass(&h.annihilator()) - 1.0).abs(),
        supergroups: supergroups.len(),
        subgroup_mass_max_deviation: subgroup_mass,
        gap_margin: gap_margin,
        solve_runs: cfg.solve_trials,
        containment_violations: violations.iter().filter(|&&v| v).count(),
    })
}

fn run_tail(cfg: &LemmaConfig, tail: &TailConfig) -> Result<TailRecord> {
    let mut rng = trial_rng(cfg.master_seed, TAIL_PURPOSE, 0);
    let inst = generate_instance(&tail.instance, None, &mut rng)?;
    let spec = inst.rep.spec().clone();
    let e = inst.rep.expectations(&Copies::Identical(&inst.state))?;
    let q = q_from_expectations(&spec, &e)?;
    let outside: Vec<GroupElement> = spec
        .elements()
        .filter(|g| !inst.gap.h_exact.contains(g))
        .collect();
    let counts = (0..tail.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.master_seed, TAIL_PURPOSE + 1, t);
            let samples: Vec<GroupElement> =
                (0..tail.m).map(|_| q.sample_label(&mut rng)).collect();
            outside
                .iter()
                .map(|g| {
                    samples
                        .iter()
                        .all(|lambda| spec.pairing_exponent(lambda, g) == 0)
                        as u64
                })
                .collect::<Vec<u64>>()
        })
        .reduce(
            || vec![0; outside.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    let elements = outside
        .iter()
        .zip(&counts)
        .map(|(g, &c)| {
            let abs = e[spec.index_of(g)].norm();
            let bound = ((1.0 + abs) / 2.0).powi(tail.m as i32);
            let sigma = (bound * (1.0 - bound) / tail.trials as f64).sqrt();
            let empirical = Rate::new(c, tail.trials as u64);
            TailElement {
                g: g.clone(),
                expectation_abs: abs,
                bound,
                excess: empirical.rate - bound - tail.sigmas * sigma,
                empirical,
            }
        })
        .collect();
    Ok(TailRecord {
        instance: tail.instance.clone(),
        m: tail.m,
        elements,
    })
}

fn instance_seeds(cfg: &LemmaConfig) -> Result<Vec<(usize, u64)>> {
    let total = cfg.instances.len() * cfg.repeats;
    match &cfg.instance_seeds {
        Some(seeds) if seeds.len() != total => Err(Error::InvalidParameter(format!(
            "{} instance seeds given for {total} instances",
            seeds.len()
        ))),
        Some(seeds) => Ok(seeds
            .iter()
            .enumerate()
            .map(|(j, &s)| (j / cfg.repeats, s))
            .collect()),
        None => Ok((0..total)
            .map(|j| {
                (
                    j / cfg.repeats,
                    trial_rng(cfg.master_seed, INSTANCE_PURPOSE, j as u64).next_u64(),
                )
            })
            .collect()),
    }
}

pub(super) fn run(cfg: &LemmaConfig) -> Result<Outcome> {
    if cfg.repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut files = Vec::new();
    for (j, (i, seed)) in instance_seeds(cfg)?.into_iter().enumerate() {
        let spec = &cfg.instances[i];
        let inst = generate_instance(spec, None, &mut ChaCha8Rng::seed_from_u64(seed))?;
        let rec = check_instance(cfg, &inst, seed)?;
        let tol = cfg.tolerance;
        let mut failed: Vec<(&str, f64, f64)> = Vec::new();
        if rec.orthogonality_max_deviation > tol {
            failed.push(("orthogonality", rec.orthogonality_max_deviation, tol));
        }
        if rec.support_deviation > tol {
            failed.push(("support", rec.support_deviation, tol));
        }
        if rec.subgroup_mass_max_deviation > tol {
            failed.push(("subgroup_mass", rec.subgroup_mass_max_deviation, tol));
        }
        if let Some(m) = rec.gap_margin.filter(|&m| m > tol) {
            failed.push(("gap_margin", m, tol));
        }
        if rec.containment_violations > 0 {
            failed.push(("containment", rec.containment_violations as f64, 0.0));
        }
        for (check, value, threshold) in failed {
            failures.push(format!(
                "instance {j} ({spec:?}): {check} = {value:e} exceeds {threshold:e}"
            ));
            let replay = LemmaConfig {
                instances: vec![spec.clone()],
                repeats: 1,
                instance_seeds: Some(vec![seed]),
                tail: None,
                output_dir: None,
                ..cfg.clone()
            };
            let artifact = ReplayArtifact {
                check: check.into(),
                value,
                threshold,
                state: inst.state.clone(),
                config: super::ExperimentConfig::LemmaCheck(replay),
            };
            files.push((
                format!("replay_{j}_{check}.json"),
                serde_json::to_string_pretty(&artifact)? + "\n",
            ));
        }
        records.push(rec);
    }
    let tail = cfg.tail.as_ref().map(|t| run_tail(cfg, t)).transpose()?;
    if let Some(t) = &tail {
        for el in t.elements.iter().filter(|el| el.excess > 0.0) {
            failures.push(format!(
                "tail: Pr(g in H) = {} for g = {:?} exceeds bound {} by more than the slack",
                el.empirical.rate, el.g.0, el.bound
            ));
        }
    }
    let records = serde_json::to_value(LemmaRecords {
        instances: records,
        tail,
    })?;
    Ok(Outcome {
        failures,
        records,
        files,
    })
}

/// Runs lemma checks without writing files.
pub fn run_lemma_checks(cfg: &LemmaConfig) -> Result<super::ExperimentReport> {
    let mut cfg = cfg.clone();
    cfg.output_dir = None;
    super::run_experiment(&super::ExperimentConfig::LemmaCheck(cfg))
}
