//! Dense state vectors of `n` qudits with prime local dimension `d`.
//!
//! Basis index `q = sum_i q_i d^(n-1-i)`: qudit 0 is the most significant
//! digit, matching ket notation `|q_0 q_1 ... q_{n-1}>`.

mod ops;
mod states;
mod weyl;

pub use ops::{
    partial_trace_purity, reduced_purity, swap_overlap, swap_purity, translation_expectation,
};
pub use states::code_state;
pub(crate) use weyl::for_each_entry as for_each_weyl_entry;
pub use weyl::{
    apply_weyl, apply_weyl_lifted, tau_order, weyl_expectation, weyl_expectation_lifted,
    zeta_power, PhasedPauli, WeylLabel,
};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modlinalg::is_prime;

/// Default cap on the number of stored amplitudes.
pub const DEFAULT_MAX_AMPS: u64 = 1 << 20;

/// Environment variable overriding [`DEFAULT_MAX_AMPS`].
pub const MAX_AMPS_ENV: &str = "QHSP_MAX_AMPS";

pub const NORM_TOL: f64 = 1e-9;

pub fn max_amps() -> u64 {
    std::env::var(MAX_AMPS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_AMPS)
}

/// `d^n`, failing with a capacity error past [`max_amps`].
pub fn dimension(n: usize, d: u64) -> Result<usize> {
    let limit = max_amps();
    let mut dim: u64 = 1;
    for _ in 0..n {
        dim = dim.saturating_mul(d);
        if dim > limit {
            return Err(Error::Capacity { needed: dim, limit });
        }
    }
    Ok(dim as usize)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n: usize,
    d: u64,
    amps: Vec<Complex64>,
}

impl PureState {
    /// Wraps an already normalized amplitude vector.
    pub fn new(n: usize, d: u64, amps: Vec<Complex64>) -> Result<Self> {
        if !is_prime(d) {
            return Err(Error::InvalidParameter(format!(
                "local dimension {d} is not prime"
            )));
        }
        let dim = dimension(n, d)?;
        if amps.len() != dim {
            return Err(Error::Shape(format!(
                "expected {dim} amplitudes, got {}",
                amps.len()
            )));
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NumericalIntegrity(format!("state norm^2 = {norm2}")));
        }
        Ok(Self { n, d, amps })
    }

    /// Normalizes `amps`; fails on a (numerically) zero vector.
    pub fn from_unnormalized(n: usize, d: u64, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::NumericalIntegrity(
                "cannot normalize the zero vector".into(),
            ));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(n, d, amps)
    }

    pub(crate) fn from_parts_unchecked(n: usize, d: u64, amps: Vec<Complex64>) -> Self {
        Self { n, d, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn basis_state(n: usize, d: u64, digits: &[u64]) -> Result<Self> {
        if digits.len() != n || digits.iter().any(|&q| q >= d) {
            return Err(Error::Shape(format!(
                "basis digits {digits:?} invalid for n={n}, d={d}"
            )));
        }
        let dim = dimension(n, d)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let idx = digits
            .iter()
            .fold(0usize, |acc, &q| acc * d as usize + q as usize);
        amps[idx] = Complex64::new(1.0, 0.0);
        Self::new(n, d, amps)
    }

    pub fn zero_state(n: usize, d: u64) -> Result<Self> {
        Self::basis_state(n, d, &vec![0; n])
    }

    /// Uniform superposition `|+>^n`.
    pub fn plus_state(n: usize, d: u64) -> Result<Self> {
        let dim = dimension(n, d)?;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self::new(n, d, vec![a; dim])
    }

    /// Haar-random state: complex normal amplitudes, normalized.
    pub fn haar_random<R: Rng + ?Sized>(n: usize, d: u64, rng: &mut R) -> Result<Self> {
        let dim = dimension(n, d)?;
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::from_unnormalized(n, d, amps)
    }

    pub fn bell_pair() -> Self {
        Self::ghz(2, 2).expect("fits")
    }

    /// `(1/sqrt d) sum_k |k k ... k>`.
    pub fn ghz(n: usize, d: u64) -> Result<Self> {
        let dim = dimension(n, d)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let step: usize = (0..n).fold(0, |acc, _| acc * d as usize + 1);
        for k in 0..d as usize {
            amps[k * step] = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        Self::new(n, d, amps)
    }

    /// Qubit W state `(1/sqrt n) sum_i |0..1_i..0>`.
    pub fn w_state(n: usize) -> Result<Self> {
        Self::momentum_w_state(n, 0)
    }

    /// Single-excitation state `(1/sqrt n) sum_k e^{2 pi i j k / n} T^k |10..0>`
    /// carrying lattice momentum `j`.
    pub fn momentum_w_state(n: usize, j: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("W state needs n >= 1".into()));
        }
        let dim = dimension(n, 2)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for k in 0..n {
            // excitation on qubit k is bit (n-1-k) of the index
            let phase = crate::fgroup::root_of_unity((j * k as u64) % n as u64, n as u64);
            amps[1usize << (n - 1 - k)] = phase / (n as f64).sqrt();
        }
        Self::new(n, 2, amps)
    }

    /// Qubit cluster state on a ring: `K_j = Z_{j-1} X_j Z_{j+1}` fixes it for all `j`.
    pub fn cluster_ring(n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "cluster ring needs even n >= 4, got {n}"
            )));
        }
        let dim = dimension(n, 2)?;
        let amp = 1.0 / (dim as f64).sqrt();
        let amps = (0..dim)
            .map(|idx| {
                let bit = |i: usize| (idx >> (n - 1 - i)) & 1;
                let edges: usize = (0..n).map(|i| bit(i) & bit((i + 1) % n)).sum();
                Complex64::new(if edges.is_multiple_of(2) { amp } else { -amp }, 0.0)
            })
            .collect();
        Self::new(n, 2, amps)
    }

    /// Tensor product with `factors[i]` placed on the qudits listed in `blocks[i]`.
    pub fn product_of_factors(factors: &[PureState], blocks: &[Vec<usize>]) -> Result<Self> {
        if factors.len() != blocks.len() || factors.is_empty() {
            return Err(Error::Shape("one block per factor required".into()));
        }
        let d = factors[0].d;
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; n];
        for (f, b) in factors.iter().zip(blocks) {
            if f.d != d || f.n != b.len() {
                return Err(Error::Shape("factor size does not match its block".into()));
            }
            for &q in b {
                if q >= n || std::mem::replace(&mut seen[q], true) {
                    return Err(Error::Shape(format!("blocks do not partition 0..{n}")));
                }
            }
        }
        let dim = dimension(n, d)?;
        let du = d as usize;
        let mut digits = vec![0usize; n];
        let amps = (0..dim)
            .map(|idx| {
                let mut r = idx;
                for q in (0..n).rev() {
                    digits[q] = r % du;
                    r /= du;
                }
                factors
                    .iter()
                    .zip(blocks)
                    .map(|(f, b)| f.amps[b.iter().fold(0, |acc, &q| acc * du + digits[q])])
                    .product()
            })
            .collect();
        Self::new(n, d, amps)
    }

    /// `self (x) other`, with `other` on the trailing qudits.
    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::Shape("local dimensions differ".into()));
        }
        dimension(self.n + other.n, self.d)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|&a| other.amps.iter().map(move |&b| a * b))
            .collect();
        Ok(Self::from_parts_unchecked(self.n + other.n, self.d, amps))
    }

    /// `|psi>^{(x) k}`; only for small cross-check instances.
    pub fn tensor_power(&self, k: usize) -> Result<Self> {
        let mut out = self.clone();
        for _ in 1..k {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Distance `|| self - other ||` (phase sensitive).
    pub fn distance(&self, other: &PureState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> PureState {
        Self::from_parts_unchecked(self.n, self.d, self.amps.iter().map(|a| a * c).collect())
    }

    /// States equal up to a global phase: `|<self|other>| >= 1 - tol`.
    pub fn equal_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        self.n == other.n && self.d == other.d && self.inner(other).norm() >= 1.0 - tol
    }

    /// Probability of each computational basis outcome.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Base-`d` digits of a basis index.
    pub fn digits(&self, mut idx: usize) -> Vec<u64> {
        let mut out = vec![0; self.n];
        for q in (0..self.n).rev() {
            out[q] = (idx % self.d as usize) as u64;
            idx /= self.d as usize;
        }
        out
    }

    /// `T^k |psi>` where `T |x_1 .. x_n> = |x_n x_1 .. x_{n-1}>`.
    pub fn apply_translation(&self, k: usize) -> PureState {
        ops::apply_translation(self, k)
    }
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    n: usize,
    d: u64,
    amps: Vec<[f64; 2]>,
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson {
            n: self.n,
            d: self.d,
            amps: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = StateJson::deserialize(de)?;
        let amps = raw
            .amps
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        PureState::new(raw.n, raw.d, amps).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ghz2_is_bell() {
        let b = PureState::bell_pair();
        assert!((b.amps()[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((b.amps()[3].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn capacity_gate() {
        assert!(matches!(
            PureState::zero_state(21, 2),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            PureState::zero_state(13, 3),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn unnormalized_input_rejected() {
        let amps = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(PureState::new(1, 2, amps).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = PureState::haar_random(3, 3, &mut rng).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: PureState = serde_json::from_str(&text).unwrap();
        for (a, b) in s.amps().iter().zip(back.amps()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn product_of_factors_places_blocks() {
        let one = PureState::basis_state(1, 2, &[1]).unwrap();
        let zero = PureState::zero_state(1, 2).unwrap();
        // |1> on qudit 2, |0> on qudit 0 and 1 via a two-qubit basis factor
        let s = PureState::product_of_factors(
            &[one, PureState::zero_state(2, 2).unwrap()],
            &[vec![2], vec![0, 1]],
        )
        .unwrap();
        assert_eq!(s, PureState::basis_state(3, 2, &[0, 0, 1]).unwrap());
        assert!(PureState::product_of_factors(&[zero.clone(), zero], &[vec![0], vec![0]]).is_err());
    }

    #[test]
    fn momentum_states_are_translation_eigenstates() {
        for n in 2..6 {
            for j in 0..n as u64 {
                let s = PureState::momentum_w_state(n, j).unwrap();
                let e = translation_expectation(&s, 1);
                let expect = crate::fgroup::root_of_unity((n as u64 - j) % n as u64, n as u64);
                assert!((e - expect).norm() < 1e-12, "n={n} j={j} e={e}");
            }
        }
    }
}
