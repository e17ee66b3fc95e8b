//! Measurement-level realizations of the character POVM.

use num_complex::Complex64;
use rand::Rng;

use super::distribution::character_sum_direct;
use super::{subset_mask, CharDistribution, CopyProvider, Family, Representation};
use crate::error::{Error, Result};
use crate::fgroup::{Character, GroupElement, GroupSpec, DEFAULT_ENUMERATION_BOUND};
use crate::qstate::{apply_weyl, for_each_weyl_entry, zeta_power, PureState, WeylLabel};

fn require_qubits(psi: &PureState) -> Result<()> {
    if psi.d() != 2 {
        return Err(Error::Unsupported(format!(
            "Bell-basis measurement needs qubits, got d = {}",
            psi.d()
        )));
    }
    Ok(())
}

/// Outcome distribution of measuring `psi (x) psi2` in the Bell basis
/// `|W_x> = (W_x (x) I)|Omega>`, as a distribution over `Z_2^{2n}` labels.
pub fn bell_basis_distribution(psi: &PureState, psi2: &PureState) -> Result<CharDistribution> {
    require_qubits(psi)?;
    require_qubits(psi2)?;
    if psi.n() != psi2.n() {
        return Err(Error::Shape(
            "Bell measurement needs equal register sizes".into(),
        ));
    }
    let n = psi.n();
    let spec = GroupSpec::symplectic(2, n)?;
    spec.ensure_enumerable(DEFAULT_ENUMERATION_BOUND)?;
    let (u, v) = (psi.amps(), psi2.amps());
    let norm = 1.0 / (psi.dim() as f64);
    let probs = spec
        .elements()
        .map(|x| {
            let (a, b) = x.0.split_at(n);
            let mut amp = Complex64::new(0.0, 0.0);
            // <W_x| phi> = 2^{-n/2} sum_q conj(phase) phi[dst(q), q]
            for_each_weyl_entry(n, 2, a, b, |src, dst, z| {
                amp += zeta_power(-z, 2) * u[dst] * v[src]
            });
            amp.norm_sqr() * norm
        })
        .collect();
    CharDistribution::from_probs(&spec, probs)
}

/// Sampler for one fixed two-copy input.
#[derive(Clone, Debug)]
pub struct BellMeasurement {
    dist: CharDistribution,
}

impl BellMeasurement {
    pub fn new(psi: &PureState, psi2: &PureState) -> Result<Self> {
        Ok(Self {
            dist: bell_basis_distribution(psi, psi2)?,
        })
    }

    pub fn distribution(&self) -> &CharDistribution {
        &self.dist
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WeylLabel {
        WeylLabel(self.dist.sample_label(rng).0)
    }
}

pub fn bell_basis_sample<R: Rng + ?Sized>(
    psi: &PureState,
    psi2: &PureState,
    rng: &mut R,
) -> Result<WeylLabel> {
    Ok(BellMeasurement::new(psi, psi2)?.sample(rng))
}

/// Distribution of `x1 + x2` for Bell measurements on `(c1, c2)` and `(c3, c4)`.
pub fn bell_difference_distribution(copies: &[PureState]) -> Result<CharDistribution> {
    if copies.len() != 4 {
        return Err(Error::Shape(format!(
            "Bell difference needs 4 copies, got {}",
            copies.len()
        )));
    }
    let p = bell_basis_distribution(&copies[0], &copies[1])?;
    let q = bell_basis_distribution(&copies[2], &copies[3])?;
    let spec = p.spec().clone();
    let mut out = vec![0.0; p.probs().len()];
    for (i, &pi) in p.probs().iter().enumerate().filter(|(_, &v)| v > 0.0) {
        let x = spec.element_at(i);
        for (j, &qj) in q.probs().iter().enumerate().filter(|(_, &v)| v > 0.0) {
            let y = spec.element_at(j);
            out[spec.index_of(&spec.add(&x, &y))] += pi * qj;
        }
    }
    CharDistribution::from_probs(&spec, out)
}

/// Draws four copies, measures two Bell pairs and returns `x1 + x2` as a
/// symplectic character label.
pub fn bell_difference_sample<R: Rng + ?Sized>(
    provider: &mut CopyProvider,
    rng: &mut R,
) -> Result<Character> {
    let c = provider.draw(4, rng)?;
    let x1 = bell_basis_sample(&c[0], &c[1], rng)?;
    let x2 = bell_basis_sample(&c[2], &c[3], rng)?;
    let spec = GroupSpec::symplectic(2, c[0].n())?;
    let label = spec.add(&GroupElement(x1.0), &GroupElement(x2.0));
    Ok(Character { spec, label })
}

/// Pairwise Bell measurement of qubit `i` of one copy against qubit `i` of
/// the other; outcome bit `y_i` flags the singlet.
pub fn swap_bell_distribution(psi: &PureState, psi2: &PureState) -> Result<CharDistribution> {
    let bell = bell_basis_distribution(psi, psi2)?;
    let n = psi.n();
    let spec = GroupSpec::elementary(2, n)?;
    let mut out = vec![0.0; spec.order() as usize];
    for (i, &p) in bell.probs().iter().enumerate() {
        let x = bell.spec().element_at(i);
        // the singlet is the pair label (a, b) = (1, 1)
        let y = GroupElement((0..n).map(|k| x.0[k] & x.0[n + k]).collect());
        out[spec.index_of(&y)] += p;
    }
    CharDistribution::from_probs(&spec, out)
}

/// Distribution of `q1 - q2 mod d` for computational-basis outcomes of the
/// two copies.
pub fn computational_difference_distribution(
    psi: &PureState,
    psi2: &PureState,
) -> Result<CharDistribution> {
    if psi.n() != psi2.n() || psi.d() != psi2.d() {
        return Err(Error::Shape("copies differ in shape".into()));
    }
    let spec = GroupSpec::elementary(psi.d(), psi.n())?;
    let (p1, p2) = (psi.probabilities(), psi2.probabilities());
    let mut out = vec![0.0; spec.order() as usize];
    for (i, &a) in p1.iter().enumerate().filter(|(_, &v)| v > 0.0) {
        let qi = GroupElement(psi.digits(i));
        for (j, &b) in p2.iter().enumerate().filter(|(_, &v)| v > 0.0) {
            let qj = GroupElement(psi.digits(j));
            out[spec.index_of(&spec.add(&qi, &spec.neg(&qj)))] += a * b;
        }
    }
    CharDistribution::from_probs(&spec, out)
}

fn sample_basis<R: Rng + ?Sized>(psi: &PureState, rng: &mut R) -> Vec<u64> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let probs = psi.probabilities();
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc && *p > 0.0 {
            return psi.digits(i);
        }
    }
    psi.digits(last)
}

/// Measures two copies in the computational basis and returns the
/// componentwise difference as a dot-pairing label over `Z_d^n`.
pub fn computational_difference_sample<R: Rng + ?Sized>(
    provider: &mut CopyProvider,
    rng: &mut R,
) -> Result<Character> {
    let c = provider.draw(2, rng)?;
    let spec = GroupSpec::elementary(c[0].d(), c[0].n())?;
    let q1 = GroupElement(sample_basis(&c[0], rng));
    let q2 = GroupElement(sample_basis(&c[1], rng));
    let label = spec.add(&q1, &spec.neg(&q2));
    Ok(Character { spec, label })
}

/// `R(g)` applied to the explicit multi-copy state.
fn act(rep: &Representation, g: &GroupElement, big: &PureState) -> Result<PureState> {
    let copies = rep.copies_per_sample();
    Ok(match rep.family() {
        Family::Translation { .. } => big.apply_translation(g.0[0] as usize),
        Family::SwapCut { n } => swap_qubits(big, *n, subset_mask(g)),
        Family::ZOnly { d, n } => {
            let minus: Vec<u64> = g.0.iter().map(|&a| (d - a) % d).collect();
            let a: Vec<u64> = g.0.iter().chain(&minus).copied().collect();
            apply_weyl(big, &WeylLabel::new(&a, &vec![0; 2 * n]))?
        }
        _ => {
            let single = rep.operator_label(g).expect("Weyl family");
            apply_weyl(big, &single.tiled(copies))?
        }
    })
}

/// Exchanges qubit `i` of the first copy with qubit `i` of the second for
/// every `i` in `mask`.
fn swap_qubits(big: &PureState, n: usize, mask: u64) -> PureState {
    let total = 2 * n;
    let bit = |q: usize| total - 1 - q;
    let mut out = vec![Complex64::new(0.0, 0.0); big.dim()];
    for (idx, &a) in big.amps().iter().enumerate() {
        let mut j = idx;
        for i in (0..n).filter(|i| mask >> i & 1 == 1) {
            let (x, y) = (idx >> bit(i) & 1, idx >> bit(n + i) & 1);
            if x != y {
                j ^= 1 << bit(i) | 1 << bit(n + i);
            }
        }
        out[j] = a;
    }
    PureState::new(big.n(), big.d(), out).expect("permutation keeps the norm")
}

/// Simulates the auxiliary-register procedure: prepare `|0>`, apply the
/// Fourier transform to get the uniform superposition, apply the controlled
/// action `sum_g |g><g| (x) R(g)`, apply the inverse Fourier transform and
/// measure the register. Returns the register distribution.
pub fn fourier_sampling_distribution(
    rep: &Representation,
    psi: &PureState,
) -> Result<CharDistribution> {
    rep.check_state(psi)?;
    let spec = rep.spec();
    spec.ensure_enumerable(DEFAULT_ENUMERATION_BOUND)?;
    let big = psi.tensor_power(rep.copies_per_sample())?;
    let order = spec.order() as usize;
    let dim = big.dim();
    let amp = Complex64::new(1.0 / (order as f64).sqrt(), 0.0);
    // rows[g] = register amplitude of |g> tensored with the system state
    let rows: Vec<Vec<Complex64>> = spec
        .elements()
        .map(|g| {
            Ok(act(rep, &g, &big)?
                .amps()
                .iter()
                .map(|&x| x * amp)
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut probs = vec![0.0; order];
    let mut column = vec![Complex64::new(0.0, 0.0); order];
    for i in 0..dim {
        for (g, row) in rows.iter().enumerate() {
            column[g] = row[i];
        }
        let out = character_sum_direct(spec, &column);
        for (p, v) in probs.iter_mut().zip(out) {
            *p += (v * amp).norm_sqr();
        }
    }
    CharDistribution::from_probs(spec, probs)
}
