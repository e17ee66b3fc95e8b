use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charpovm::{CopyProvider, Representation};
use crate::error::{Error, Result};
use crate::fgroup::Subgroup;
use crate::hsp::{solve, LearnReport, SolveOptions, StateHSPInstance};
use crate::qstate::{tau_order, zeta_power, PhasedPauli, PureState, WeylLabel};

pub const STAB_SCHEMA: &str = "stabresult/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizerGroupResult {
    pub schema: String,
    pub n: usize,
    pub d: u64,
    /// Block length `p` for a global-symmetry result.
    pub block: Option<usize>,
    pub tau_order: u64,
    pub phaseless: Subgroup,
    /// Generators acting on all `n` qudits (tiled for block results).
    pub phased_generators: Vec<PhasedPauli>,
    pub report: LearnReport,
}

impl StabilizerGroupResult {
    /// Generators as strings like `+XZZ` (qubits) or `tau^s W_x`.
    pub fn generator_strings(&self) -> Vec<String> {
        self.phased_generators
            .iter()
            .map(|g| g.to_string())
            .collect()
    }
}

/// Promise gap of `W_x^{(x) D}` given the single-copy gap.
pub fn lifted_gap(epsilon: f64, d: u64) -> f64 {
    1.0 - (1.0 - epsilon).powi(tau_order(d) as i32)
}

/// Exponent `s` with `e / |e| = tau^s`, rejecting residual angles above
/// `pi / (2 D)`.
pub fn round_phase(e: Complex64, d: u64) -> Result<i64> {
    let big_d = tau_order(d) as i64;
    let tau_zeta = (d * d + 1) as i64;
    let mut best = (f64::INFINITY, 0);
    for s in 0..big_d {
        let r = (e * zeta_power(s * tau_zeta, d).conj()).arg().abs();
        if r < best.0 {
            best = (r, s);
        }
    }
    if e.norm() < 1e-9 || best.0 > PI / (2.0 * big_d as f64) {
        return Err(Error::PromiseViolation(format!(
            "expectation {e:.6} is not close to a power of tau (residual angle {:.3e})",
            best.0
        )));
    }
    Ok(best.1)
}

/// `tau^{-s} W_x` with `<W_x> = tau^s` on `psi`, so that it fixes `psi`.
pub(crate) fn phased_generators(psi: &PureState, labels: &[WeylLabel]) -> Result<Vec<PhasedPauli>> {
    let d = psi.d();
    labels
        .iter()
        .map(|x| {
            let e = crate::qstate::weyl_expectation(psi, x)?;
            let s = round_phase(e, d)?;
            Ok(PhasedPauli::new(x.clone(), -s, d))
        })
        .collect()
}

fn phase_reference<'a>(
    provider: &'a mut CopyProvider,
    seed: u64,
    storage: &'a mut Option<PureState>,
) -> Result<&'a PureState> {
    if provider.state().is_none() {
        // every code state has the same stabilizer eigenvalues; one copy fixes them
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        *storage = Some(provider.draw(1, &mut rng)?.remove(0));
        return Ok(storage.as_ref().expect("set"));
    }
    Ok(provider.state().expect("identical mode"))
}

fn learn_weyl(
    rep: Representation,
    provider: CopyProvider,
    epsilon: f64,
    delta: f64,
    opts: &SolveOptions,
    seed: u64,
    block: Option<usize>,
) -> Result<StabilizerGroupResult> {
    let (n, d) = provider.shape();
    let mut inst = StateHSPInstance::new(rep.clone(), provider, lifted_gap(epsilon, d), delta)?;
    let mut report = solve(&mut inst, opts, seed)?;
    let labels: Vec<WeylLabel> = report
        .h
        .canonical_basis()
        .iter()
        .map(|g| rep.operator_label(g).expect("Weyl family"))
        .collect();
    let mut storage = None;
    let psi = phase_reference(&mut inst.provider, seed, &mut storage)?;
    let phased_generators = phased_generators(psi, &labels)?;
    report.copies_consumed = inst.provider.consumed();
    Ok(StabilizerGroupResult {
        schema: STAB_SCHEMA.into(),
        n,
        d,
        block,
        tau_order: tau_order(d),
        phaseless: report.h.clone(),
        phased_generators,
        report,
    })
}

/// Learns `Weyl(|psi>)` and the signs of its generators. `epsilon` is the
/// single-copy gap `|<W_x>| <= 1 - epsilon` off the group.
pub fn learn_stabilizer_group(
    provider: CopyProvider,
    epsilon: f64,
    delta: f64,
    opts: &SolveOptions,
    seed: u64,
) -> Result<StabilizerGroupResult> {
    let (n, d) = provider.shape();
    learn_weyl(
        Representation::weyl(d, n)?,
        provider,
        epsilon,
        delta,
        opts,
        seed,
        None,
    )
}

/// Learns the on-site symmetries `W_x^{(x) n/p}` for `x` in `Z_d^{2p}`.
pub fn learn_global_symmetry(
    provider: CopyProvider,
    p: usize,
    epsilon: f64,
    delta: f64,
    opts: &SolveOptions,
    seed: u64,
) -> Result<StabilizerGroupResult> {
    let (n, d) = provider.shape();
    learn_weyl(
        Representation::blocked_weyl(d, p, n)?,
        provider,
        epsilon,
        delta,
        opts,
        seed,
        Some(p),
    )
}

/// Every element `tau^s W_x` of the group generated by `gens`, as
/// `(label, phase)` pairs. Exponential; for checks on small groups.
pub fn phased_closure(gens: &[PhasedPauli], n: usize, d: u64) -> Vec<PhasedPauli> {
    let mut seen = vec![PhasedPauli::identity(n, d)];
    let mut frontier = seen.clone();
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = x.compose(g);
            if !seen.contains(&y) {
                seen.push(y.clone());
                frontier.push(y);
            }
        }
    }
    seen
}

/// True when the only multiple of the identity in the generated group is `I`.
pub fn is_free_of_identity_multiples(gens: &[PhasedPauli], n: usize, d: u64) -> bool {
    phased_closure(gens, n, d)
        .iter()
        .all(|p| !p.is_identity_multiple() || p.phase_exp == 0)
}
