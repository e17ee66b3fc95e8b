use serde::{Deserialize, Serialize};

use crate::charpovm::{CopyProvider, Representation};
use crate::error::{Error, Result};
use crate::fgroup::{generated_subgroup, GroupElement, GroupSpec, Subgroup};
use crate::hsp::{solve, LearnReport, SolveOptions, StateHSPInstance};

pub const CUT_SCHEMA: &str = "cutresult/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutResult {
    pub schema: String,
    pub n: usize,
    pub subgroup: Subgroup,
    /// Blocks of 0-based qubit indices, sorted by their smallest element.
    pub partition: Vec<Vec<usize>>,
    pub report: LearnReport,
}

/// `H = span{1_{C_i}}`: indicator vectors of the blocks.
pub fn partition_to_subgroup(n: usize, blocks: &[Vec<usize>]) -> Result<Subgroup> {
    let spec = GroupSpec::elementary(2, n)?;
    let mut seen = vec![false; n];
    let mut gens = Vec::new();
    for block in blocks {
        let mut v = vec![0; n];
        for &i in block {
            if i >= n || seen[i] {
                return Err(Error::Shape(format!(
                    "blocks {blocks:?} are not a partition of {n} qubits"
                )));
            }
            seen[i] = true;
            v[i] = 1;
        }
        gens.push(GroupElement(v));
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::Shape(format!(
            "blocks {blocks:?} do not cover {n} qubits"
        )));
    }
    generated_subgroup(&spec, &gens)
}

/// Finest partition compatible with `h`: `i ~ j` iff every canonical basis
/// vector agrees on `i` and `j`.
pub fn subgroup_to_partition(h: &Subgroup) -> Result<Vec<Vec<usize>>> {
    let n = h.spec().rank();
    if !h.contains(&GroupElement(vec![1; n])) {
        return Err(Error::Inconsistency(
            "the all-ones vector is missing from the cut subgroup".into(),
        ));
    }
    let basis = h.canonical_basis();
    let signature = |i: usize| basis.iter().map(|b| b.0[i]).collect::<Vec<u64>>();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut keys: Vec<Vec<u64>> = Vec::new();
    for i in 0..n {
        let key = signature(i);
        match keys.iter().position(|k| *k == key) {
            Some(b) => blocks[b].push(i),
            None => {
                keys.push(key);
                blocks.push(vec![i]);
            }
        }
    }
    Ok(blocks)
}

/// Learns the block structure of a product of entangled factors. `epsilon`
/// is the per-factor distance, so non-block subsets have purity at most
/// `1 - epsilon^2` and the representation gap is `epsilon^2`.
pub fn learn_hidden_cut(
    provider: CopyProvider,
    epsilon: f64,
    delta: f64,
    opts: &SolveOptions,
    seed: u64,
) -> Result<CutResult> {
    let (n, d) = provider.shape();
    if d != 2 {
        return Err(Error::Unsupported(format!(
            "hidden cut is defined on qubits, got d = {d}"
        )));
    }
    let mut inst = StateHSPInstance::new(
        Representation::swap_cut(n)?,
        provider,
        epsilon * epsilon,
        delta,
    )?;
    let report = solve(&mut inst, opts, seed)?;
    let partition = subgroup_to_partition(&report.h)?;
    Ok(CutResult {
        schema: CUT_SCHEMA.into(),
        n,
        subgroup: report.h.clone(),
        partition,
        report,
    })
}
