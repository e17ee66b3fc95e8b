//! Character POVM: exact output distributions `q(lambda)` for each
//! representation family, plus measurement-level samplers.
//!
//! For a representation `R` of `G` acting on copies of a state,
//! `q(lambda) = (1/|G|) sum_g conj(chi_lambda(g)) <R(g)>`.

mod distribution;
mod measure;
mod sampler;

pub use distribution::{q_distribution, q_from_expectations, CharDistribution};
pub use measure::{
    bell_basis_distribution, bell_basis_sample, bell_difference_distribution,
    bell_difference_sample, computational_difference_distribution, computational_difference_sample,
    fourier_sampling_distribution, swap_bell_distribution, BellMeasurement,
};
pub use sampler::{CharacterSampler, SamplerKind};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fgroup::{
    generated_subgroup, GroupElement, GroupSpec, Subgroup, DEFAULT_ENUMERATION_BOUND,
};
use crate::modlinalg::is_prime;
use crate::qstate::{
    code_state, swap_overlap, tau_order, translation_expectation, weyl_expectation, PhasedPauli,
    PureState, WeylLabel,
};

/// Tolerance on `|<R(g)> - 1|` for calling `g` an exact symmetry.
pub const EXACT_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `R(x) = W_x^{(x) D}` on `Z_d^{2n}`.
    WeylSymplectic { d: u64, n: usize },
    /// `R(x) = (x)_i SWAP_i^{x_i}` on two copies, `Z_2^n`.
    SwapCut { n: usize },
    /// `R(k) = T^k` on `Z_n`.
    Translation { n: usize },
    /// `R(x) = (W_x^{(x) n/p})^{(x) D}` on `Z_d^{2p}`.
    BlockedWeyl { d: u64, p: usize, n: usize },
    /// `R(a) = Z^a (x) Z^{-a}` on two copies, `Z_d^n`.
    ZOnly { d: u64, n: usize },
}

/// A representation family together with its group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representation {
    family: Family,
    spec: GroupSpec,
}

impl Representation {
    pub fn new(family: Family) -> Result<Self> {
        let prime = |d: u64| {
            if is_prime(d) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "local dimension {d} is not prime"
                )))
            }
        };
        let spec = match family {
            Family::WeylSymplectic { d, n } => {
                prime(d)?;
                GroupSpec::symplectic(d, n)?
            }
            Family::SwapCut { n } => GroupSpec::elementary(2, n)?,
            Family::Translation { n } => GroupSpec::cyclic(n as u64)?,
            Family::BlockedWeyl { d, p, n } => {
                prime(d)?;
                if p == 0 || n % p != 0 {
                    return Err(Error::Shape(format!("block size {p} does not divide {n}")));
                }
                GroupSpec::symplectic(d, p)?
            }
            Family::ZOnly { d, n } => {
                prime(d)?;
                GroupSpec::elementary(d, n)?
            }
        };
        if let Family::SwapCut { n } | Family::Translation { n } = family {
            if n == 0 {
                return Err(Error::InvalidParameter("need at least one qudit".into()));
            }
        }
        Ok(Self { family, spec })
    }

    pub fn weyl(d: u64, n: usize) -> Result<Self> {
        Self::new(Family::WeylSymplectic { d, n })
    }

    pub fn swap_cut(n: usize) -> Result<Self> {
        Self::new(Family::SwapCut { n })
    }

    pub fn translation(n: usize) -> Result<Self> {
        Self::new(Family::Translation { n })
    }

    pub fn blocked_weyl(d: u64, p: usize, n: usize) -> Result<Self> {
        Self::new(Family::BlockedWeyl { d, p, n })
    }

    pub fn z_only(d: u64, n: usize) -> Result<Self> {
        Self::new(Family::ZOnly { d, n })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    /// `(n, d)` of one copy.
    pub fn state_shape(&self) -> (usize, u64) {
        match self.family {
            Family::WeylSymplectic { d, n }
            | Family::BlockedWeyl { d, n, .. }
            | Family::ZOnly { d, n } => (n, d),
            Family::SwapCut { n } => (n, 2),
            Family::Translation { n } => (n, 2),
        }
    }

    /// Copies of the state one application of `R` acts on.
    pub fn copies_per_sample(&self) -> usize {
        match self.family {
            Family::WeylSymplectic { d, .. } | Family::BlockedWeyl { d, .. } => {
                tau_order(d) as usize
            }
            Family::SwapCut { .. } | Family::ZOnly { .. } => 2,
            Family::Translation { .. } => 1,
        }
    }

    pub fn check_state(&self, psi: &PureState) -> Result<()> {
        let (n, d) = self.state_shape();
        let ok =
            psi.n() == n && (psi.d() == d || matches!(self.family, Family::Translation { .. }));
        if !ok {
            return Err(Error::Shape(format!(
                "state on {} qudits of dimension {} does not fit {:?}",
                psi.n(),
                psi.d(),
                self.family
            )));
        }
        Ok(())
    }

    fn weyl_label(&self, g: &GroupElement) -> WeylLabel {
        match self.family {
            Family::BlockedWeyl { p, n, .. } => WeylLabel(g.0.clone()).tiled(n / p),
            Family::ZOnly { n, .. } => WeylLabel::new(&g.0, &vec![0; n]),
            _ => WeylLabel(g.0.clone()),
        }
    }

    /// The single-copy operator behind `R(g)` as a Weyl label, for the Weyl
    /// based families.
    pub fn operator_label(&self, g: &GroupElement) -> Option<WeylLabel> {
        match self.family {
            Family::WeylSymplectic { .. } | Family::BlockedWeyl { .. } | Family::ZOnly { .. } => {
                Some(self.weyl_label(g))
            }
            _ => None,
        }
    }

    /// Single-copy quantity whose modulus decides whether `g` is a symmetry:
    /// `<W>` for the Weyl families, `<T^k>`, or the reduced purity.
    pub fn state_value(&self, psi: &PureState, g: &GroupElement) -> Result<Complex64> {
        self.check_state(psi)?;
        self.spec.check(g)?;
        Ok(match self.family {
            Family::SwapCut { .. } => swap_overlap(psi, psi, subset_mask(g)),
            Family::Translation { .. } => translation_expectation(psi, g.0[0] as usize),
            _ => weyl_expectation(psi, &self.weyl_label(g))?,
        })
    }

    /// `<R(g)>` on `copies_per_sample` identical copies of `psi`.
    pub fn expectation(&self, psi: &PureState, g: &GroupElement) -> Result<Complex64> {
        let v = self.state_value(psi, g)?;
        Ok(self.lift(v))
    }

    fn lift(&self, v: Complex64) -> Complex64 {
        match self.family {
            Family::WeylSymplectic { d, .. } | Family::BlockedWeyl { d, .. } => {
                v.powu(tau_order(d) as u32)
            }
            Family::ZOnly { .. } => Complex64::new(v.norm_sqr(), 0.0),
            _ => v,
        }
    }

    /// `<R(g)>` on a product of distinct copies, one state per tensor factor.
    pub fn expectation_distinct(
        &self,
        copies: &[PureState],
        g: &GroupElement,
    ) -> Result<Complex64> {
        if copies.len() != self.copies_per_sample() {
            return Err(Error::Shape(format!(
                "{} copies supplied, representation acts on {}",
                copies.len(),
                self.copies_per_sample()
            )));
        }
        for c in copies {
            self.check_state(c)?;
        }
        self.spec.check(g)?;
        Ok(match self.family {
            Family::SwapCut { .. } => swap_overlap(&copies[0], &copies[1], subset_mask(g)),
            Family::Translation { .. } => translation_expectation(&copies[0], g.0[0] as usize),
            Family::ZOnly { .. } => {
                let label = self.weyl_label(g);
                weyl_expectation(&copies[0], &label)? * weyl_expectation(&copies[1], &label)?.conj()
            }
            _ => {
                let label = self.weyl_label(g);
                let mut acc = Complex64::new(1.0, 0.0);
                for c in copies {
                    acc *= weyl_expectation(c, &label)?;
                }
                acc
            }
        })
    }

    /// `<R(g)>` for every `g` in index order.
    pub fn expectations(&self, copies: &Copies<'_>) -> Result<Vec<Complex64>> {
        self.spec.ensure_enumerable(DEFAULT_ENUMERATION_BOUND)?;
        self.spec
            .elements()
            .map(|g| match copies {
                Copies::Identical(psi) => self.expectation(psi, &g),
                Copies::Distinct(cs) => self.expectation_distinct(cs, &g),
            })
            .collect()
    }
}

/// Bit `i` of the mask marks qubit `i` as swapped.
pub(crate) fn subset_mask(g: &GroupElement) -> u64 {
    g.0.iter()
        .enumerate()
        .filter(|(_, &c)| c == 1)
        .fold(0, |m, (i, _)| m | 1 << i)
}

/// The copies one sample is drawn from.
#[derive(Clone, Copy, Debug)]
pub enum Copies<'a> {
    Identical(&'a PureState),
    Distinct(&'a [PureState]),
}

#[derive(Clone, Debug)]
pub enum CopySource {
    Identical(PureState),
    /// Fresh random code states from the joint +1 eigenspace of `generators`.
    CodeStream {
        generators: Vec<PhasedPauli>,
        n: usize,
        d: u64,
    },
}

/// Source of state copies with a running count of copies handed out.
#[derive(Clone, Debug)]
pub struct CopyProvider {
    source: CopySource,
    consumed: u64,
}

impl CopyProvider {
    pub fn identical(psi: PureState) -> Self {
        Self {
            source: CopySource::Identical(psi),
            consumed: 0,
        }
    }

    pub fn code_stream(generators: Vec<PhasedPauli>, n: usize, d: u64) -> Self {
        Self {
            source: CopySource::CodeStream { generators, n, d },
            consumed: 0,
        }
    }

    pub fn source(&self) -> &CopySource {
        &self.source
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn reset(&mut self) {
        self.consumed = 0;
    }

    /// The fixed state in identical-copies mode.
    pub fn state(&self) -> Option<&PureState> {
        match &self.source {
            CopySource::Identical(psi) => Some(psi),
            CopySource::CodeStream { .. } => None,
        }
    }

    pub fn shape(&self) -> (usize, u64) {
        match &self.source {
            CopySource::Identical(psi) => (psi.n(), psi.d()),
            CopySource::CodeStream { n, d, .. } => (*n, *d),
        }
    }

    /// Records `k` identical copies as used.
    pub fn take_identical(&mut self, k: usize) -> Result<&PureState> {
        match &self.source {
            CopySource::Identical(psi) => {
                self.consumed += k as u64;
                Ok(psi)
            }
            CopySource::CodeStream { .. } => Err(Error::Unsupported(
                "copy provider streams distinct states".into(),
            )),
        }
    }

    /// `k` copies as separate states (clones in identical mode).
    pub fn draw<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> Result<Vec<PureState>> {
        let out = match &self.source {
            CopySource::Identical(psi) => vec![psi.clone(); k],
            CopySource::CodeStream { generators, n, d } => (0..k)
                .map(|_| code_state(generators, *n, *d, rng))
                .collect::<Result<Vec<_>>>()?,
        };
        self.consumed += k as u64;
        Ok(out)
    }
}

/// Measured promise gap of a known state.
#[derive(Clone, Debug)]
pub struct PromiseGap {
    /// `1 - max |v(g)|` over `g` outside `h_exact`, with `v` the single-copy
    /// value (`<W>`, `<T^k>` or the reduced purity).
    pub epsilon: f64,
    /// `1 - max |<R(g)>|` over the same elements, the gap of `R` itself.
    pub epsilon_eff: f64,
    /// Elements with `R(g)|Psi> = |Psi>`, phase included.
    pub h_exact: Subgroup,
}

/// Scans all of `G` for exact symmetries and the gap to the rest.
pub fn measure_epsilon(rep: &Representation, psi: &PureState) -> Result<PromiseGap> {
    let spec = rep.spec();
    spec.ensure_enumerable(DEFAULT_ENUMERATION_BOUND)?;
    let mut members = Vec::new();
    let (mut worst, mut worst_eff) = (0.0f64, 0.0f64);
    for g in spec.elements() {
        let v = rep.state_value(psi, &g)?;
        let lifted = rep.lift(v);
        if (lifted - 1.0).norm() <= EXACT_TOL {
            members.push(g);
        } else {
            worst = worst.max(v.norm().min(1.0));
            worst_eff = worst_eff.max(lifted.norm().min(1.0));
        }
    }
    let h_exact = generated_subgroup(spec, &members)?;
    if h_exact.order() != members.len() as u64 {
        return Err(Error::Inconsistency(format!(
            "{} exact symmetries do not form a subgroup (closure has {})",
            members.len(),
            h_exact.order()
        )));
    }
    Ok(PromiseGap {
        epsilon: 1.0 - worst,
        epsilon_eff: 1.0 - worst_eff,
        h_exact,
    })
}

/// Finite ensemble `rho = sum_i p_i |psi_i><psi_i|`.
#[derive(Clone, Debug)]
pub struct MixedState {
    pub components: Vec<(f64, PureState)>,
}

impl MixedState {
    pub fn new(components: Vec<(f64, PureState)>) -> Result<Self> {
        let total: f64 = components.iter().map(|(p, _)| p).sum();
        if components.is_empty()
            || (total - 1.0).abs() > 1e-9
            || components.iter().any(|(p, _)| *p < 0.0)
        {
            return Err(Error::InvalidParameter(
                "mixture weights must be nonnegative and sum to 1".into(),
            ));
        }
        Ok(Self { components })
    }

    pub fn pure(psi: PureState) -> Self {
        Self {
            components: vec![(1.0, psi)],
        }
    }

    /// `tr(R(g) rho^{(x) c})`, expanded by multilinearity over all tuples of
    /// components.
    pub fn expectation(&self, rep: &Representation, g: &GroupElement) -> Result<Complex64> {
        let c = rep.copies_per_sample();
        let k = self.components.len();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut tuple = vec![0usize; c];
        loop {
            let weight: f64 = tuple.iter().map(|&i| self.components[i].0).product();
            if weight > 0.0 {
                let copies: Vec<PureState> = tuple
                    .iter()
                    .map(|&i| self.components[i].1.clone())
                    .collect();
                acc += rep.expectation_distinct(&copies, g)? * weight;
            }
            let mut pos = c;
            loop {
                if pos == 0 {
                    return Ok(acc);
                }
                pos -= 1;
                tuple[pos] += 1;
                if tuple[pos] < k {
                    break;
                }
                tuple[pos] = 0;
            }
        }
    }

    pub fn q_distribution(&self, rep: &Representation) -> Result<CharDistribution> {
        rep.spec().ensure_enumerable(DEFAULT_ENUMERATION_BOUND)?;
        let e = rep
            .spec()
            .elements()
            .map(|g| self.expectation(rep, &g))
            .collect::<Result<Vec<_>>>()?;
        q_from_expectations(rep.spec(), &e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn group_specs_per_family() {
        assert_eq!(
            Representation::weyl(3, 2).unwrap().spec().factors(),
            &[3, 3, 3, 3]
        );
        assert_eq!(Representation::swap_cut(3).unwrap().spec().order(), 8);
        assert_eq!(
            Representation::translation(6).unwrap().spec().factors(),
            &[6]
        );
        assert_eq!(
            Representation::blocked_weyl(2, 2, 8).unwrap().spec().rank(),
            4
        );
        assert!(Representation::blocked_weyl(2, 3, 8).is_err());
        assert!(Representation::weyl(4, 1).is_err());
    }

    #[test]
    fn copies_per_sample_follow_tau_order() {
        assert_eq!(Representation::weyl(2, 1).unwrap().copies_per_sample(), 4);
        assert_eq!(Representation::weyl(3, 1).unwrap().copies_per_sample(), 3);
        assert_eq!(Representation::swap_cut(2).unwrap().copies_per_sample(), 2);
        assert_eq!(
            Representation::translation(2).unwrap().copies_per_sample(),
            1
        );
    }

    #[test]
    fn lifted_expectation_matches_explicit_tensor_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = PureState::haar_random(1, 2, &mut rng).unwrap();
        let rep = Representation::weyl(2, 1).unwrap();
        let big = psi.tensor_power(4).unwrap();
        for g in rep.spec().elements() {
            let tiled = WeylLabel(g.0.clone()).tiled(4);
            let explicit = weyl_expectation(&big, &tiled).unwrap();
            assert!((rep.expectation(&psi, &g).unwrap() - explicit).norm() < 1e-12);
        }
    }

    #[test]
    fn distinct_copies_reduce_to_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = PureState::haar_random(2, 2, &mut rng).unwrap();
        for rep in [
            Representation::weyl(2, 2).unwrap(),
            Representation::swap_cut(2).unwrap(),
            Representation::z_only(2, 2).unwrap(),
            Representation::translation(2).unwrap(),
        ] {
            let copies = vec![psi.clone(); rep.copies_per_sample()];
            for g in rep.spec().elements() {
                let a = rep.expectation(&psi, &g).unwrap();
                let b = rep.expectation_distinct(&copies, &g).unwrap();
                assert!((a - b).norm() < 1e-12, "{:?} {g}", rep.family());
            }
        }
    }

    #[test]
    fn measured_gap_of_zero_state() {
        let psi = PureState::zero_state(1, 2).unwrap();
        let gap = measure_epsilon(&Representation::weyl(2, 1).unwrap(), &psi).unwrap();
        assert_eq!(gap.h_exact.order(), 2);
        assert!(gap.h_exact.contains(&GroupElement(vec![1, 0])));
        assert!((gap.epsilon - 1.0).abs() < 1e-12);
    }

    #[test]
    fn copy_counter_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut p = CopyProvider::identical(PureState::zero_state(1, 2).unwrap());
        p.take_identical(4).unwrap();
        p.draw(2, &mut rng).unwrap();
        assert_eq!(p.consumed(), 6);
    }

    #[test]
    fn pure_mixture_matches_pure_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = PureState::haar_random(2, 2, &mut rng).unwrap();
        let rep = Representation::swap_cut(2).unwrap();
        let a = MixedState::pure(psi.clone()).q_distribution(&rep).unwrap();
        let b = q_distribution(&rep, &Copies::Identical(&psi)).unwrap();
        assert!(a.total_variation(&b) < 1e-12);
    }
}
