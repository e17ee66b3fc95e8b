use serde::{Deserialize, Serialize};

use crate::charpovm::{CopyProvider, Representation};
use crate::error::{Error, Result};
use crate::fgroup::{gcd, generated_subgroup, GroupElement, GroupSpec, Subgroup};
use crate::hsp::{solve, LearnReport, SolveOptions, StateHSPInstance};

pub const TRANS_SCHEMA: &str = "transresult/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationResult {
    pub schema: String,
    pub n: usize,
    /// Smallest `r > 0` with `T^r |psi> = |psi>`.
    pub r: u64,
    pub subgroup: Subgroup,
    pub report: LearnReport,
}

/// `H_r = {0, r, 2r, ...}` inside `Z_n`.
pub fn period_subgroup(n: u64, r: u64) -> Result<Subgroup> {
    if r == 0 || !n.is_multiple_of(r) {
        return Err(Error::InvalidParameter(format!(
            "period {r} does not divide {n}"
        )));
    }
    generated_subgroup(&GroupSpec::cyclic(n)?, &[GroupElement(vec![r % n])])
}

/// `n / gcd(n, j_1, ..., j_m)`.
pub fn period_from_samples(n: u64, samples: &[GroupElement]) -> u64 {
    n / samples.iter().fold(n, |g, j| gcd(g, j.0[0]))
}

/// Learns the translation period. Needs `n >= 2`; `epsilon` bounds
/// `|<T^k>|` away from 1 off `H_r`.
pub fn learn_translation(
    provider: CopyProvider,
    epsilon: f64,
    delta: f64,
    opts: &SolveOptions,
    seed: u64,
) -> Result<TranslationResult> {
    let (n, _) = provider.shape();
    let mut inst =
        StateHSPInstance::new(Representation::translation(n)?, provider, epsilon, delta)?;
    let report = solve(&mut inst, opts, seed)?;
    let r = period_from_samples(n as u64, &report.sampled_labels);
    let subgroup = period_subgroup(n as u64, r)?;
    if subgroup != report.h {
        return Err(Error::Inconsistency(format!(
            "gcd period {r} disagrees with the annihilator {:?}",
            report.h
        )));
    }
    Ok(TranslationResult {
        schema: TRANS_SCHEMA.into(),
        n,
        r,
        subgroup,
        report,
    })
}
