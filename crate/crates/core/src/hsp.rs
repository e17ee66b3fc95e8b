//! Generic abelian StateHSP solver: draw characters, take the subgroup they
//! generate as `H^perp`, return its annihilator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charpovm::{CharacterSampler, CopyProvider, Representation, SamplerKind, EXACT_TOL};
use crate::error::{Error, Result};
use crate::fgroup::{GroupElement, GroupSpec, Subgroup, DEFAULT_ENUMERATION_BOUND};

pub const REPORT_SCHEMA: &str = "learnreport/1";

/// `m = ceil(4 (ln|G| + ln(1/delta)) / epsilon)`.
pub fn sample_count(spec: &GroupSpec, epsilon: f64, delta: f64) -> u64 {
    let ln_g: f64 = spec.factors().iter().map(|&f| (f as f64).ln()).sum();
    (4.0 * (ln_g + (1.0 / delta).ln()) / epsilon).ceil() as u64
}

#[derive(Clone, Debug)]
pub struct StateHSPInstance {
    pub rep: Representation,
    pub provider: CopyProvider,
    /// Promise gap of `R` itself: `|<R(g)>| <= 1 - epsilon` off `H`.
    pub epsilon: f64,
    pub delta: f64,
    pub ground_truth: Option<Subgroup>,
}

impl StateHSPInstance {
    pub fn new(
        rep: Representation,
        provider: CopyProvider,
        epsilon: f64,
        delta: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {epsilon} outside (0, 1]"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {delta} outside (0, 1)"
            )));
        }
        if let Some(psi) = provider.state() {
            rep.check_state(psi)?;
        }
        Ok(Self {
            rep,
            provider,
            epsilon,
            delta,
            ground_truth: None,
        })
    }

    pub fn with_ground_truth(mut self, h: Subgroup) -> Self {
        self.ground_truth = Some(h);
        self
    }

    pub fn spec(&self) -> &GroupSpec {
        self.rep.spec()
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub sampler: SamplerKind,
    /// Overrides `sample_count`.
    pub samples: Option<u64>,
    /// Stop once `H^perp` has not grown for this many consecutive samples.
    pub early_stop: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub schema: String,
    pub seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub samples_drawn: u64,
    pub copies_consumed: u64,
    pub sampled_labels: Vec<GroupElement>,
    pub h_perp: Subgroup,
    pub h: Subgroup,
    /// `||R(h)|Psi> - |Psi>||` per canonical generator of `h`.
    pub exact_check: Option<Vec<f64>>,
    /// `min |<R(h)>|` over the canonical generators of `h`.
    pub expectation_check: Option<f64>,
}

/// Runs the sampler `m` times (or until early stop) from a fresh
/// `ChaCha8Rng` seeded with `seed`.
pub fn solve(
    instance: &mut StateHSPInstance,
    opts: &SolveOptions,
    seed: u64,
) -> Result<LearnReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = instance.spec().clone();
    let m = opts
        .samples
        .unwrap_or_else(|| sample_count(&spec, instance.epsilon, instance.delta));
    let mut sampler = CharacterSampler::new(instance.rep.clone(), opts.sampler)?;
    instance.provider.reset();
    let mut h_perp = Subgroup::trivial(&spec);
    let mut labels = Vec::with_capacity(m as usize);
    let mut unchanged = 0u64;
    for _ in 0..m {
        let ch = sampler.draw(&mut instance.provider, &mut rng)?;
        let grown = h_perp.extend(&ch.label)?;
        if grown == h_perp {
            unchanged += 1;
        } else {
            unchanged = 0;
            h_perp = grown;
        }
        labels.push(ch.label);
        if opts.early_stop.is_some_and(|w| unchanged >= w) {
            break;
        }
    }
    let h = h_perp.annihilator();
    if h.order() * h_perp.order() != spec.order() {
        return Err(Error::Inconsistency(format!(
            "|H| |H^perp| = {} * {} != |G| = {}",
            h.order(),
            h_perp.order(),
            spec.order()
        )));
    }
    let (exact_check, expectation_check) = match instance.provider.state() {
        Some(psi) => {
            let mut residuals = Vec::new();
            let mut min_abs = f64::INFINITY;
            for g in h.canonical_basis() {
                let e = instance.rep.expectation(psi, &g)?;
                residuals.push((2.0 - 2.0 * e.re).max(0.0).sqrt());
                min_abs = min_abs.min(e.norm());
            }
            let min_abs = if residuals.is_empty() { 1.0 } else { min_abs };
            (Some(residuals), Some(min_abs))
        }
        None => (None, None),
    };
    Ok(LearnReport {
        schema: REPORT_SCHEMA.into(),
        seed,
        epsilon: instance.epsilon,
        delta: instance.delta,
        samples_drawn: labels.len() as u64,
        copies_consumed: instance.provider.consumed(),
        sampled_labels: labels,
        h_perp,
        h,
        exact_check,
        expectation_check,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// Exact symmetries of the state missing from `H`; always empty on a
    /// correct sampler. `None` when the state is not available.
    pub missing_symmetries: Option<Vec<GroupElement>>,
    /// Every canonical generator of `H` has `|<R(h)>| >= 1 - epsilon`.
    pub expectation_ok: Option<bool>,
    pub matches_ground_truth: Option<bool>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.missing_symmetries
            .as_ref()
            .is_none_or(|v| v.is_empty())
            && self.expectation_ok != Some(false)
            && self.matches_ground_truth != Some(false)
    }
}

/// `g` with `R(g)|Psi> = |Psi>`, by scanning the whole group.
pub fn exact_symmetries(
    rep: &Representation,
    psi: &crate::qstate::PureState,
) -> Result<Vec<GroupElement>> {
    rep.spec().ensure_enumerable(DEFAULT_ENUMERATION_BOUND)?;
    let mut out = Vec::new();
    for g in rep.spec().elements() {
        if (rep.expectation(psi, &g)? - 1.0).norm() <= EXACT_TOL {
            out.push(g);
        }
    }
    Ok(out)
}

pub fn verify_output(instance: &StateHSPInstance, report: &LearnReport) -> Result<Verification> {
    let missing_symmetries = match instance.provider.state() {
        Some(psi) => Some(
            exact_symmetries(&instance.rep, psi)?
                .into_iter()
                .filter(|g| !report.h.contains(g))
                .collect(),
        ),
        None => None,
    };
    let expectation_ok = report
        .expectation_check
        .map(|v| v >= 1.0 - instance.epsilon - 1e-12);
    let matches_ground_truth = instance.ground_truth.as_ref().map(|h| *h == report.h);
    Ok(Verification {
        missing_symmetries,
        expectation_ok,
        matches_ground_truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgroup::generated_subgroup;
    use crate::qstate::PureState;
    use num_complex::Complex64;

    #[test]
    fn sample_count_example() {
        let spec = GroupSpec::elementary(2, 4).unwrap();
        assert_eq!(sample_count(&spec, 0.5, 0.1), 41);
    }

    #[test]
    fn sample_count_ln_g_term_doubles() {
        let a = GroupSpec::symplectic(2, 2).unwrap();
        let b = GroupSpec::symplectic(2, 4).unwrap();
        let ln = |s: &GroupSpec| 4.0 * (s.order() as f64).ln();
        assert!((ln(&b) - 2.0 * ln(&a)).abs() < 1e-9);
        // with delta = 1/e the log(1/delta) term is exactly 4
        let m = sample_count(&a, 1.0, (-1.0f64).exp());
        assert_eq!(m, (ln(&a) + 4.0).ceil() as u64);
    }

    #[test]
    fn translation_instance_finds_h() {
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        amps[0b0101] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        amps[0b1010] = Complex64::new(-1.0 / 2f64.sqrt(), 0.0);
        let psi = PureState::new(4, 2, amps).unwrap();
        let rep = Representation::translation(4).unwrap();
        let mut inst = StateHSPInstance::new(rep, CopyProvider::identical(psi), 1.0, 0.05).unwrap();
        let report = solve(&mut inst, &SolveOptions::default(), 7).unwrap();
        let expect = generated_subgroup(inst.spec(), &[GroupElement(vec![2])]).unwrap();
        assert_eq!(report.h, expect);
        assert_eq!(report.copies_consumed, report.samples_drawn);
        let v = verify_output(&inst, &report).unwrap();
        assert!(v.passed());
    }

    #[test]
    fn deterministic_in_seed() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(2);
        let psi = PureState::haar_random(2, 2, &mut rng).unwrap();
        let rep = Representation::weyl(2, 2).unwrap();
        let mut inst = StateHSPInstance::new(rep, CopyProvider::identical(psi), 0.5, 0.1).unwrap();
        let a = solve(&mut inst, &SolveOptions::default(), 99).unwrap();
        let b = solve(&mut inst, &SolveOptions::default(), 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.copies_consumed, 4 * a.samples_drawn);
    }

    #[test]
    fn early_stop_is_opt_in() {
        let psi = PureState::zero_state(2, 2).unwrap();
        let rep = Representation::weyl(2, 2).unwrap();
        let mut inst = StateHSPInstance::new(rep, CopyProvider::identical(psi), 1.0, 0.1).unwrap();
        let full = solve(&mut inst, &SolveOptions::default(), 1).unwrap();
        assert_eq!(full.samples_drawn, sample_count(inst.spec(), 1.0, 0.1));
        let opts = SolveOptions {
            early_stop: Some(5),
            ..Default::default()
        };
        let short = solve(&mut inst, &opts, 1).unwrap();
        assert!(short.samples_drawn < full.samples_drawn);
    }

    #[test]
    fn rejects_bad_parameters() {
        let psi = PureState::zero_state(1, 2).unwrap();
        let rep = Representation::weyl(2, 1).unwrap();
        assert!(
            StateHSPInstance::new(rep.clone(), CopyProvider::identical(psi.clone()), 0.0, 0.1)
                .is_err()
        );
        assert!(StateHSPInstance::new(rep, CopyProvider::identical(psi), 0.5, 1.0).is_err());
    }
}
