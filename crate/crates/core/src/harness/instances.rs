//! Instance generators with known hidden subgroups and measured gaps.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::apps::{partition_to_subgroup, period_subgroup};
use crate::charpovm::{measure_epsilon, PromiseGap, Representation};
use crate::error::{Error, Result};
use crate::fgroup::{generated_subgroup, GroupElement, GroupSpec, Subgroup};
use crate::modlinalg::{symplectic_form, FpMatrix};
use crate::qstate::{code_state, tau_order, PhasedPauli, PureState, WeylLabel};

/// Attempts before `generate_instance` gives up.
pub const RETRY_CAP: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    /// Random stabilizer state.
    Stabilizer { n: usize, d: u64 },
    /// `cos(t/2)|0> + sin(t/2)|1>` on qubit 0, random stabilizer state on the
    /// rest; `t` is chosen so the single-copy gap is `epsilon`.
    RotatedStabilizer { n: usize, epsilon: f64 },
    /// Haar-random factors on a random partition with the given block sizes.
    Cut { blocks: Vec<usize> },
    /// `(cos a|00> + sin a|11>) (x) |0...0>` with purity gap `purity_gap`.
    EntangledPair { n: usize, purity_gap: f64 },
    /// Random state averaged over the orbit of `T^period`.
    Translation { n: usize, period: u64 },
    /// `sqrt(1-eta)|0...0> + sqrt(eta)|W_1>`, no translation symmetry.
    MomentumMix { n: usize, eta: f64 },
    /// Cluster ring with the blocked Weyl family of block length `p`.
    Global { n: usize, p: usize },
}

impl InstanceSpec {
    pub fn representation(&self) -> Result<Representation> {
        match self {
            InstanceSpec::Stabilizer { n, d } => Representation::weyl(*d, *n),
            InstanceSpec::RotatedStabilizer { n, .. } => Representation::weyl(2, *n),
            InstanceSpec::Cut { blocks } => Representation::swap_cut(blocks.iter().sum()),
            InstanceSpec::EntangledPair { n, .. } => Representation::swap_cut(*n),
            InstanceSpec::Translation { n, .. } | InstanceSpec::MomentumMix { n, .. } => {
                Representation::translation(*n)
            }
            InstanceSpec::Global { n, p } => Representation::blocked_weyl(2, *p, *n),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub state: PureState,
    pub rep: Representation,
    pub ground_truth: Subgroup,
    pub gap: PromiseGap,
    /// Phased stabilizer generators of the state, when constructed from them.
    pub generators: Option<Vec<PhasedPauli>>,
    pub partition: Option<Vec<Vec<usize>>>,
    pub period: Option<u64>,
}

impl Instance {
    /// Gap handed to a learner: the single-copy gap, except for the cut
    /// family where learners take `sqrt` of the purity gap.
    pub fn learner_epsilon(&self) -> f64 {
        match self.spec {
            InstanceSpec::Cut { .. } | InstanceSpec::EntangledPair { .. } => {
                self.gap.epsilon.sqrt()
            }
            _ => self.gap.epsilon,
        }
    }

    pub fn meta(&self) -> InstanceMeta {
        InstanceMeta {
            instance: self.spec.clone(),
            ground_truth: Some(self.ground_truth.clone()),
            epsilon: Some(self.gap.epsilon),
            epsilon_eff: Some(self.gap.epsilon_eff),
            generators: self
                .generators
                .as_ref()
                .map(|g| g.iter().map(|p| p.to_string()).collect()),
            partition: self.partition.clone(),
            period: self.period,
        }
    }
}

/// Ground truth sidecar written next to generated states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub instance: InstanceSpec,
    pub ground_truth: Option<Subgroup>,
    pub epsilon: Option<f64>,
    pub epsilon_eff: Option<f64>,
    pub generators: Option<Vec<String>>,
    pub partition: Option<Vec<Vec<usize>>>,
    pub period: Option<u64>,
}

/// `n` independent, pairwise commuting labels in `Z_d^{2n}`, built by
/// repeatedly drawing from the symplectic complement of the labels so far.
pub fn random_lagrangian<R: Rng + ?Sized>(n: usize, d: u64, rng: &mut R) -> Result<Vec<WeylLabel>> {
    let k = 2 * n;
    let unit = |j: usize| {
        let mut e = vec![0; k];
        e[j] = 1;
        e
    };
    let mut gens: Vec<Vec<u64>> = Vec::with_capacity(n);
    while gens.len() < n {
        // rows r with r . x = [g, x]
        let rows: Vec<Vec<u64>> = gens
            .iter()
            .map(|g| {
                (0..k)
                    .map(|j| symplectic_form(g, &unit(j), d))
                    .collect::<Result<Vec<u64>>>()
            })
            .collect::<Result<_>>()?;
        let complement = if rows.is_empty() {
            FpMatrix::identity(k, d)?
        } else {
            FpMatrix::from_rows(&rows, k, d)?.kernel_basis()
        };
        let mut x = vec![0u64; k];
        for row in complement.to_rows() {
            let c = rng.random_range(0..d);
            for (xi, ri) in x.iter_mut().zip(&row) {
                *xi = (*xi + c * ri) % d;
            }
        }
        let mut candidate = gens.clone();
        candidate.push(x.clone());
        if FpMatrix::from_rows(&candidate, k, d)?.rank() == candidate.len() {
            gens.push(x);
        }
    }
    Ok(gens.into_iter().map(WeylLabel).collect())
}

/// Random stabilizer state with its phased generators. Signs are drawn
/// among the phases for which `tau^s W_x` has eigenvalue 1.
pub fn random_stabilizer_state<R: Rng + ?Sized>(
    n: usize,
    d: u64,
    rng: &mut R,
) -> Result<(PureState, Vec<PhasedPauli>)> {
    let labels = random_lagrangian(n, d, rng)?;
    // qubit W_x is Hermitian, so only +-1 phases are admissible
    let phases: Vec<i64> = if d == 2 {
        vec![0, 2]
    } else {
        (0..tau_order(d) as i64).collect()
    };
    let gens: Vec<PhasedPauli> = labels
        .into_iter()
        .map(|l| PhasedPauli::new(l, phases[rng.random_range(0..phases.len())], d))
        .collect();
    let psi = code_state(&gens, n, d, rng)?;
    Ok((psi, gens))
}

fn labels_subgroup(spec: &GroupSpec, labels: &[WeylLabel]) -> Result<Subgroup> {
    let elems: Vec<GroupElement> = labels.iter().map(|l| GroupElement(l.0.clone())).collect();
    generated_subgroup(spec, &elems)
}

fn rotated_qubit(theta: f64) -> Result<PureState> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    PureState::new(1, 2, vec![Complex64::new(c, 0.0), Complex64::new(s, 0.0)])
}

fn attempt<R: Rng + ?Sized>(spec: &InstanceSpec, rng: &mut R) -> Result<Instance> {
    let rep = spec.representation()?;
    let group = rep.spec().clone();
    let mut generators = None;
    let mut partition = None;
    let mut period = None;
    let (state, ground_truth) = match spec {
        InstanceSpec::Stabilizer { n, d } => {
            let (psi, gens) = random_stabilizer_state(*n, *d, rng)?;
            let labels: Vec<WeylLabel> = gens.iter().map(|g| g.label.clone()).collect();
            generators = Some(gens);
            (psi, labels_subgroup(&group, &labels)?)
        }
        InstanceSpec::RotatedStabilizer { n, epsilon } => {
            if *n < 2 || !(*epsilon > 0.0 && *epsilon < 1.0 - std::f64::consts::FRAC_1_SQRT_2) {
                return Err(Error::InvalidParameter(format!(
                    "rotated stabilizer needs n >= 2 and 0 < epsilon < 1 - 1/sqrt2, got {n}, {epsilon}"
                )));
            }
            // <Z> = cos t on the rotated qubit
            let qubit = rotated_qubit((1.0 - epsilon).acos())?;
            let (rest, gens) = random_stabilizer_state(n - 1, 2, rng)?;
            let lift = |l: &WeylLabel| {
                let a: Vec<u64> = std::iter::once(0).chain(l.a().iter().copied()).collect();
                let b: Vec<u64> = std::iter::once(0).chain(l.b().iter().copied()).collect();
                WeylLabel::new(&a, &b)
            };
            let labels: Vec<WeylLabel> = gens.iter().map(|g| lift(&g.label)).collect();
            generators = Some(
                gens.iter()
                    .zip(&labels)
                    .map(|(g, l)| PhasedPauli::new(l.clone(), g.phase_exp as i64, 2))
                    .collect(),
            );
            (qubit.tensor(&rest)?, labels_subgroup(&group, &labels)?)
        }
        InstanceSpec::Cut { blocks } => {
            let n: usize = blocks.iter().sum();
            if blocks.contains(&0) {
                return Err(Error::InvalidParameter("empty block".into()));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let mut parts: Vec<Vec<usize>> = Vec::new();
            let mut at = 0;
            for &size in blocks {
                let mut b = order[at..at + size].to_vec();
                b.sort_unstable();
                parts.push(b);
                at += size;
            }
            parts.sort();
            let factors = parts
                .iter()
                .map(|b| PureState::haar_random(b.len(), 2, rng))
                .collect::<Result<Vec<_>>>()?;
            let psi = PureState::product_of_factors(&factors, &parts)?;
            let h = partition_to_subgroup(n, &parts)?;
            partition = Some(parts);
            (psi, h)
        }
        InstanceSpec::EntangledPair { n, purity_gap } => {
            if *n < 2 || !(*purity_gap > 0.0 && *purity_gap <= 0.5) {
                return Err(Error::InvalidParameter(format!(
                    "entangled pair needs n >= 2 and 0 < gap <= 1/2, got {n}, {purity_gap}"
                )));
            }
            // purity of one side is 1 - sin^2(2a)/2
            let alpha = 0.5 * (2.0 * purity_gap).sqrt().asin();
            let pair = PureState::new(
                2,
                2,
                vec![
                    Complex64::new(alpha.cos(), 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(alpha.sin(), 0.0),
                ],
            )?;
            let psi = pair.tensor(&PureState::zero_state(n - 2, 2)?)?;
            let parts: Vec<Vec<usize>> = std::iter::once(vec![0, 1])
                .chain((2..*n).map(|i| vec![i]))
                .collect();
            let h = partition_to_subgroup(*n, &parts)?;
            partition = Some(parts);
            (psi, h)
        }
        InstanceSpec::Translation { n, period: r } => {
            let h = period_subgroup(*n as u64, *r)?;
            let seed = PureState::haar_random(*n, 2, rng)?;
            let mut acc = vec![Complex64::new(0.0, 0.0); seed.dim()];
            for t in 0..(*n as u64 / r) {
                let shifted = seed.apply_translation((t * r) as usize);
                acc.iter_mut()
                    .zip(shifted.amps())
                    .for_each(|(a, b)| *a += b);
            }
            period = Some(*r);
            (PureState::from_unnormalized(*n, 2, acc)?, h)
        }
        InstanceSpec::MomentumMix { n, eta } => {
            if !(*eta > 0.0 && *eta < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "eta = {eta} outside (0, 1)"
                )));
            }
            let zero = PureState::zero_state(*n, 2)?;
            let w = PureState::momentum_w_state(*n, 1)?;
            let amps: Vec<Complex64> = zero
                .amps()
                .iter()
                .zip(w.amps())
                .map(|(a, b)| a * (1.0 - eta).sqrt() + b * eta.sqrt())
                .collect();
            period = Some(*n as u64);
            (PureState::new(*n, 2, amps)?, Subgroup::trivial(&group))
        }
        InstanceSpec::Global { n, .. } => {
            let psi = PureState::cluster_ring(*n)?;
            let h = measure_epsilon(&rep, &psi)?.h_exact;
            (psi, h)
        }
    };
    let gap = measure_epsilon(&rep, &state)?;
    if gap.h_exact != ground_truth {
        return Err(Error::Generation(format!(
            "measured symmetry group of order {} differs from the planted one of order {}",
            gap.h_exact.order(),
            ground_truth.order()
        )));
    }
    Ok(Instance {
        spec: spec.clone(),
        state,
        rep,
        ground_truth,
        gap,
        generators,
        partition,
        period,
    })
}

/// Builds an instance, resampling until the measured symmetry group equals
/// the planted one and the single-copy gap is at least `min_gap`.
pub fn generate_instance<R: Rng + ?Sized>(
    spec: &InstanceSpec,
    min_gap: Option<f64>,
    rng: &mut R,
) -> Result<Instance> {
    let mut last = String::new();
    for _ in 0..RETRY_CAP {
        match attempt(spec, rng) {
            Ok(inst) if min_gap.is_none_or(|g| inst.gap.epsilon >= g) => return Ok(inst),
            Ok(inst) => last = format!("gap {} below target", inst.gap.epsilon),
            Err(Error::Generation(msg)) => last = msg,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Generation(format!(
        "no valid {spec:?} instance after {RETRY_CAP} attempts: {last}"
    )))
}
