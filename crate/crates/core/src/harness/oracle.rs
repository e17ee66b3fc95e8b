//! Measurement-simulated samplers against the exact character distribution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{trial_rng, Outcome};
use crate::charpovm::{
    fourier_sampling_distribution, q_distribution, CharDistribution, CharacterSampler, Copies,
    CopyProvider, Representation, SamplerKind,
};
use crate::error::{Error, Result};
use crate::qstate::PureState;

const ORACLE_PURPOSE: u64 = 4 << 32;

fn default_draws() -> usize {
    100_000
}

fn default_tv() -> f64 {
    0.02
}

fn default_p() -> f64 {
    0.001
}

fn default_exact_tol() -> f64 {
    1e-9
}

fn two() -> u64 {
    2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Two Bell-basis measurements on four copies, labels added.
    BellDifference,
    /// Bell-basis measurement on two copies, bitwise AND of the halves.
    SwapBell,
    /// Two computational-basis measurements, digits subtracted.
    ComputationalDifference,
    /// Controlled translation on an auxiliary register, then its Fourier
    /// transform. Compared exactly.
    FourierSampling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum NamedState {
    Zero {
        n: usize,
        #[serde(default = "two")]
        d: u64,
    },
    Plus {
        n: usize,
        #[serde(default = "two")]
        d: u64,
    },
    Bell,
    Ghz {
        n: usize,
        #[serde(default = "two")]
        d: u64,
    },
    W {
        n: usize,
    },
    Cluster {
        n: usize,
    },
    Haar {
        n: usize,
        #[serde(default = "two")]
        d: u64,
        seed: u64,
    },
}

impl NamedState {
    pub fn build(&self) -> Result<PureState> {
        match self {
            NamedState::Zero { n, d } => PureState::zero_state(*n, *d),
            NamedState::Plus { n, d } => PureState::plus_state(*n, *d),
            NamedState::Bell => Ok(PureState::bell_pair()),
            NamedState::Ghz { n, d } => PureState::ghz(*n, *d),
            NamedState::W { n } => PureState::w_state(*n),
            NamedState::Cluster { n } => PureState::cluster_ring(*n),
            NamedState::Haar { n, d, seed } => {
                PureState::haar_random(*n, *d, &mut ChaCha8Rng::seed_from_u64(*seed))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCase {
    pub route: Route,
    pub state: NamedState,
}

impl OracleCase {
    fn representation(&self, psi: &PureState) -> Result<Representation> {
        let (n, d) = (psi.n(), psi.d());
        match self.route {
            Route::BellDifference => Representation::weyl(d, n),
            Route::SwapBell => Representation::swap_cut(n),
            Route::ComputationalDifference => Representation::z_only(d, n),
            Route::FourierSampling => Representation::translation(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub master_seed: u64,
    pub cases: Vec<OracleCase>,
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_tv")]
    pub tv_threshold: f64,
    #[serde(default = "default_p")]
    pub p_threshold: f64,
    #[serde(default = "default_exact_tol")]
    pub exact_tolerance: f64,
    #[serde(default)]
    pub output_dir: Option<std::path::PathBuf>,
    #[serde(default)]
    pub record_timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub case: OracleCase,
    pub n: usize,
    pub d: u64,
    /// Statistical routes only.
    pub draws: Option<usize>,
    pub total_variation: Option<f64>,
    pub chi_square: Option<f64>,
    pub degrees_of_freedom: Option<usize>,
    pub p_value: Option<f64>,
    /// Exact route only: `max_lambda |q_sim(lambda) - q(lambda)|`.
    pub max_abs_difference: Option<f64>,
    pub passed: bool,
}

/// Pearson chi-square goodness of fit. Bins with expected count below 5 are
/// pooled; any count on a zero-probability label gives `p = 0`.
/// Returns `(statistic, degrees of freedom, p)`.
pub fn chi_square_p_value(counts: &[u64], probs: &[f64]) -> Result<(f64, usize, f64)> {
    let total: u64 = counts.iter().sum();
    let total = total as f64;
    if counts.iter().zip(probs).any(|(&c, &p)| c > 0 && p <= 0.0) {
        return Ok((f64::INFINITY, 0, 0.0));
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        if p <= 0.0 {
            continue;
        }
        let expected = p * total;
        if expected < 5.0 {
            pooled.0 += c as f64;
            pooled.1 += expected;
        } else {
            bins.push((c as f64, expected));
        }
    }
    if pooled.1 > 0.0 {
        if pooled.1 >= 5.0 || bins.is_empty() {
            bins.push(pooled);
        } else {
            let last = bins.last_mut().expect("non-empty");
            last.0 += pooled.0;
            last.1 += pooled.1;
        }
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len().saturating_sub(1);
    if dof == 0 {
        return Ok((stat, 0, 1.0));
    }
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((stat, dof, chi.sf(stat)))
}

fn run_case(cfg: &OracleConfig, index: usize, case: &OracleCase) -> Result<OracleRecord> {
    let psi = case.state.build()?;
    let rep = case.representation(&psi)?;
    let exact = q_distribution(&rep, &Copies::Identical(&psi))?;
    let (n, d) = (psi.n(), psi.d());
    if case.route == Route::FourierSampling {
        let sim = fourier_sampling_distribution(&rep, &psi)?;
        let diff = sim
            .probs()
            .iter()
            .zip(exact.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        return Ok(OracleRecord {
            case: case.clone(),
            n,
            d,
            draws: None,
            total_variation: None,
            chi_square: None,
            degrees_of_freedom: None,
            p_value: None,
            max_abs_difference: Some(diff),
            passed: diff <= cfg.exact_tolerance,
        });
    }
    let mut sampler = CharacterSampler::new(rep.clone(), SamplerKind::Measurement)?;
    let mut provider = CopyProvider::identical(psi);
    let mut rng = trial_rng(cfg.master_seed, ORACLE_PURPOSE, index as u64);
    let spec = rep.spec();
    let mut counts = vec![0u64; spec.order() as usize];
    for _ in 0..cfg.draws {
        let ch = sampler.draw(&mut provider, &mut rng)?;
        counts[spec.index_of(&ch.label)] += 1;
    }
    let empirical: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / cfg.draws as f64)
        .collect();
    let emp = CharDistribution::from_probs(spec, empirical)?;
    let tv = emp.total_variation(&exact);
    let (stat, dof, p) = chi_square_p_value(&counts, exact.probs())?;
    Ok(OracleRecord {
        case: case.clone(),
        n,
        d,
        draws: Some(cfg.draws),
        total_variation: Some(tv),
        chi_square: Some(stat),
        degrees_of_freedom: Some(dof),
        p_value: Some(p),
        max_abs_difference: None,
        passed: tv <= cfg.tv_threshold && p > cfg.p_threshold,
    })
}

pub(super) fn run(cfg: &OracleConfig) -> Result<Outcome> {
    if cfg.draws == 0 {
        return Err(Error::InvalidParameter("draws must be at least 1".into()));
    }
    let records: Vec<OracleRecord> = cfg
        .cases
        .par_iter()
        .enumerate()
        .map(|(i, c)| run_case(cfg, i, c))
        .collect::<Result<_>>()?;
    let failures = records
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.passed)
        .map(|(i, r)| {
            format!(
                "case {i} {:?}: tv {:?} p {:?} exact {:?}",
                r.case, r.total_variation, r.p_value, r.max_abs_difference
            )
        })
        .collect();
    Ok(Outcome {
        failures,
        records: serde_json::to_value(&records)?,
        files: Vec::new(),
    })
}

/// Runs oracle checks without writing files.
pub fn run_oracle_equivalence(cfg: &OracleConfig) -> Result<super::ExperimentReport> {
    let mut cfg = cfg.clone();
    cfg.output_dir = None;
    super::run_experiment(&super::ExperimentConfig::OracleEquivalence(cfg))
}
