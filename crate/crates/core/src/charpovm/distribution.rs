use num_complex::Complex64;
use rand::Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{Copies, Representation};
use crate::error::{Error, Result};
use crate::fgroup::{root_of_unity, Character, GroupElement, GroupSpec, Shape, Subgroup};

/// Mass below this is rounding noise and is set to zero.
const ZERO_CLAMP: f64 = 1e-12;
/// Mass below minus this means a broken evaluator.
const NEGATIVE_LIMIT: f64 = 1e-6;
const SUM_TOL: f64 = 1e-9;

/// Validated probability distribution over the characters of `spec`, stored
/// in index order of the labels.
#[derive(Clone, Debug)]
pub struct CharDistribution {
    spec: GroupSpec,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl CharDistribution {
    /// Validates, clamps and renormalizes raw probabilities.
    pub fn from_probs(spec: &GroupSpec, raw: Vec<f64>) -> Result<Self> {
        if raw.len() as u64 != spec.order() {
            return Err(Error::Shape(format!(
                "{} probabilities for a group of order {}",
                raw.len(),
                spec.order()
            )));
        }
        let mut probs = raw;
        for (i, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -NEGATIVE_LIMIT {
                return Err(Error::NumericalIntegrity(format!(
                    "probability {p} at {}",
                    spec.element_at(i)
                )));
            }
            if *p < ZERO_CLAMP {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::NumericalIntegrity(format!(
                "probabilities sum to {total}"
            )));
        }
        probs.iter_mut().for_each(|p| *p /= total);
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            probs,
            cumulative,
        })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    /// Probabilities in index order of the labels.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, label: &GroupElement) -> f64 {
        self.probs[self.spec.index_of(label)]
    }

    pub fn mass(&self, k: &Subgroup) -> f64 {
        k.elements().iter().map(|g| self.prob(g)).sum()
    }

    pub fn support(&self) -> Vec<GroupElement> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| self.spec.element_at(i))
            .collect()
    }

    pub fn total_variation(&self, other: &CharDistribution) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    /// One label by inverse-CDF lookup.
    pub fn sample_label<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let u: f64 = rng.random::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let idx = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.probs.len() - 1);
        // never land on a zero-probability label through rounding at the top end
        let idx = if self.probs[idx] > 0.0 {
            idx
        } else {
            self.probs
                .iter()
                .rposition(|&p| p > 0.0)
                .expect("nonempty support")
        };
        self.spec.element_at(idx)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<Character> {
        (0..count)
            .map(|_| Character {
                spec: self.spec.clone(),
                label: self.sample_label(rng),
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("distribution serializes")
    }
}

#[derive(Serialize)]
struct Entry {
    label: GroupElement,
    p: f64,
}

impl Serialize for CharDistribution {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = self
            .probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| Entry {
                label: self.spec.element_at(i),
                p,
            })
            .collect();
        let mut s = ser.serialize_struct("CharDistribution", 3)?;
        s.serialize_field("spec", &self.spec)?;
        s.serialize_field("probs", &entries)?;
        s.serialize_field("sum", &self.probs.iter().sum::<f64>())?;
        s.end()
    }
}

/// Character sum `q(lambda) = (1/|G|) sum_g conj(chi_lambda(g)) e[g]` for
/// expectations `e` in index order.
pub fn q_from_expectations(spec: &GroupSpec, e: &[Complex64]) -> Result<CharDistribution> {
    if e.len() as u64 != spec.order() {
        return Err(Error::Shape(format!(
            "{} expectations for a group of order {}",
            e.len(),
            spec.order()
        )));
    }
    let raw = match spec.shape() {
        Shape::Elementary { d, k } => character_sum_elementary(spec, d, k, e),
        _ => character_sum_direct(spec, e),
    };
    let order = spec.order() as f64;
    let mut probs = Vec::with_capacity(raw.len());
    for (i, v) in raw.into_iter().enumerate() {
        let v = v / order;
        if v.im.abs() > NEGATIVE_LIMIT {
            return Err(Error::NumericalIntegrity(format!(
                "q has imaginary part {} at {}",
                v.im,
                spec.element_at(i)
            )));
        }
        probs.push(v.re);
    }
    CharDistribution::from_probs(spec, probs)
}

pub(crate) fn character_sum_direct(spec: &GroupSpec, e: &[Complex64]) -> Vec<Complex64> {
    let l = spec.phase_denominator();
    let roots: Vec<Complex64> = (0..l).map(|t| root_of_unity(t, l)).collect();
    let elems: Vec<GroupElement> = spec.elements().collect();
    elems
        .iter()
        .map(|lambda| {
            elems
                .iter()
                .zip(e)
                .map(|(g, &v)| roots[((l - spec.pairing_exponent(lambda, g)) % l) as usize] * v)
                .sum()
        })
        .collect()
}

/// Same sum through a per-axis DFT over `Z_d^k`: any pairing on an
/// elementary group is `chi_lambda(g) = omega^{g . mu(lambda)}` for a linear
/// `mu`, read off from the unit vectors.
fn character_sum_elementary(spec: &GroupSpec, d: u64, k: usize, e: &[Complex64]) -> Vec<Complex64> {
    let du = d as usize;
    let roots: Vec<Complex64> = (0..d).map(|t| root_of_unity((d - t) % d, d)).collect();
    let mut f = e.to_vec();
    let mut stride = 1usize;
    for _ in 0..k {
        let block = stride * du;
        let mut buf = vec![Complex64::new(0.0, 0.0); du];
        for base in (0..f.len()).step_by(block) {
            for off in 0..stride {
                for (m, slot) in buf.iter_mut().enumerate() {
                    *slot = (0..du)
                        .map(|j| roots[j * m % du] * f[base + off + j * stride])
                        .sum();
                }
                for (m, &v) in buf.iter().enumerate() {
                    f[base + off + m * stride] = v;
                }
            }
        }
        stride = block;
    }
    // f[mu] = sum_g omega^{-g.mu} e[g]
    let units: Vec<GroupElement> = (0..k)
        .map(|i| {
            let mut c = vec![0; k];
            c[i] = 1;
            GroupElement(c)
        })
        .collect();
    spec.elements()
        .map(|lambda| {
            let mu = GroupElement(
                units
                    .iter()
                    .map(|u| spec.pairing_exponent(&lambda, u))
                    .collect(),
            );
            f[spec.index_of(&mu)]
        })
        .collect()
}

/// Exact `q` for the given copies.
pub fn q_distribution(rep: &Representation, copies: &Copies<'_>) -> Result<CharDistribution> {
    let e = rep.expectations(copies)?;
    q_from_expectations(rep.spec(), &e)
}
