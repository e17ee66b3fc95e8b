use rand::Rng;
use serde::{Deserialize, Serialize};

use super::measure::{
    bell_difference_sample, computational_difference_sample, fourier_sampling_distribution,
};
use super::{
    q_distribution, BellMeasurement, CharDistribution, Copies, CopyProvider, Family, Representation,
};
use crate::error::{Error, Result};
use crate::fgroup::{Character, GroupElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Inverse-CDF draws from the exact distribution.
    #[default]
    Exact,
    /// Simulated measurement routine of the family.
    Measurement,
}

/// Draws characters for one representation, charging copies to the
/// provider.
///
/// In identical-copies mode the per-state tables are built on the first draw
/// and reused, so a sampler must stay with one provider.
#[derive(Clone, Debug)]
pub struct CharacterSampler {
    rep: Representation,
    kind: SamplerKind,
    exact: Option<CharDistribution>,
    bell: Option<BellMeasurement>,
}

impl CharacterSampler {
    pub fn new(rep: Representation, kind: SamplerKind) -> Result<Self> {
        if kind == SamplerKind::Measurement {
            match rep.family() {
                Family::WeylSymplectic { d: 2, .. } | Family::SwapCut { .. } => {}
                Family::ZOnly { .. } | Family::Translation { .. } => {}
                other => {
                    return Err(Error::Unsupported(format!(
                        "no measurement routine for {other:?}"
                    )));
                }
            }
        }
        Ok(Self {
            rep,
            kind,
            exact: None,
            bell: None,
        })
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    pub fn draw<R: Rng + ?Sized>(
        &mut self,
        provider: &mut CopyProvider,
        rng: &mut R,
    ) -> Result<Character> {
        match self.kind {
            SamplerKind::Exact => self.draw_exact(provider, rng),
            SamplerKind::Measurement => self.draw_measured(provider, rng),
        }
    }

    fn character(&self, label: GroupElement) -> Character {
        Character {
            spec: self.rep.spec().clone(),
            label,
        }
    }

    fn draw_exact<R: Rng + ?Sized>(
        &mut self,
        provider: &mut CopyProvider,
        rng: &mut R,
    ) -> Result<Character> {
        let c = self.rep.copies_per_sample();
        if provider.state().is_some() {
            let psi = provider.take_identical(c)?;
            if self.exact.is_none() {
                self.exact = Some(q_distribution(&self.rep, &Copies::Identical(psi))?);
            }
            let label = self.exact.as_ref().expect("cached").sample_label(rng);
            return Ok(self.character(label));
        }
        let copies = provider.draw(c, rng)?;
        let q = q_distribution(&self.rep, &Copies::Distinct(&copies))?;
        Ok(self.character(q.sample_label(rng)))
    }

    fn draw_measured<R: Rng + ?Sized>(
        &mut self,
        provider: &mut CopyProvider,
        rng: &mut R,
    ) -> Result<Character> {
        let rep = self.rep.clone();
        match rep.family() {
            Family::WeylSymplectic { .. } => {
                if provider.state().is_none() {
                    return bell_difference_sample(provider, rng);
                }
                let psi = provider.take_identical(4)?;
                let bell = self.bell_for(psi)?;
                let (x1, x2) = (bell.sample(rng), bell.sample(rng));
                let spec = rep.spec();
                Ok(self.character(spec.add(&GroupElement(x1.0), &GroupElement(x2.0))))
            }
            Family::SwapCut { n } => {
                let n = *n;
                let x = if provider.state().is_some() {
                    let psi = provider.take_identical(2)?;
                    self.bell_for(psi)?.sample(rng)
                } else {
                    let c = provider.draw(2, rng)?;
                    BellMeasurement::new(&c[0], &c[1])?.sample(rng)
                };
                Ok(self.character(GroupElement((0..n).map(|k| x.0[k] & x.0[n + k]).collect())))
            }
            Family::ZOnly { .. } => computational_difference_sample(provider, rng),
            Family::Translation { .. } => {
                if provider.state().is_some() {
                    let psi = provider.take_identical(1)?;
                    if self.exact.is_none() {
                        self.exact = Some(fourier_sampling_distribution(&rep, psi)?);
                    }
                    let label = self.exact.as_ref().expect("cached").sample_label(rng);
                    return Ok(self.character(label));
                }
                let c = provider.draw(1, rng)?;
                let dist = fourier_sampling_distribution(&rep, &c[0])?;
                Ok(self.character(dist.sample_label(rng)))
            }
            Family::BlockedWeyl { .. } => unreachable!("rejected in new"),
        }
    }

    fn bell_for(&mut self, psi: &crate::qstate::PureState) -> Result<&BellMeasurement> {
        if self.bell.is_none() {
            self.bell = Some(BellMeasurement::new(psi, psi)?);
        }
        Ok(self.bell.as_ref().expect("cached"))
    }
}
