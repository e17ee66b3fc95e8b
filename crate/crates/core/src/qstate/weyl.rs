//! Weyl operators `W_x = tau^{-a.b} (Z^{a_1} X^{b_1}) (x) ... (x) (Z^{a_n} X^{b_n})`.
//!
//! Phases are tracked as exact integer exponents of `zeta = e^{i pi / d}`
//! (order `2d`), with `omega = zeta^2` and `tau = zeta^{d^2 + 1}`. `W_x` maps
//! `|q>` to `tau^{-a.b} omega^{a.(q+b)} |q + b>`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PureState;
use crate::error::{Error, Result};
use crate::fgroup::root_of_unity;
use crate::modlinalg;

/// Order `D` of `tau`: `d` for odd `d`, `2d` for even `d`.
pub fn tau_order(d: u64) -> u64 {
    if d.is_multiple_of(2) {
        2 * d
    } else {
        d
    }
}

/// `zeta^k` with `zeta = e^{i pi / d}`.
pub fn zeta_power(k: i64, d: u64) -> Complex64 {
    root_of_unity(k.rem_euclid(2 * d as i64) as u64, 2 * d)
}

/// `tau^e` as a power of zeta.
fn tau_in_zeta(e: i64, d: u64) -> i64 {
    e * (d * d + 1) as i64
}

/// Label `x = (a, b)` of an `n`-qudit Weyl operator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeylLabel(pub Vec<u64>);

impl WeylLabel {
    pub fn new(a: &[u64], b: &[u64]) -> Self {
        WeylLabel(a.iter().chain(b).copied().collect())
    }

    pub fn n(&self) -> usize {
        self.0.len() / 2
    }

    pub fn a(&self) -> &[u64] {
        &self.0[..self.n()]
    }

    pub fn b(&self) -> &[u64] {
        &self.0[self.n()..]
    }

    /// `W_x^{(x) reps}` written as a single label on `reps * n` qudits.
    pub fn tiled(&self, reps: usize) -> WeylLabel {
        let a: Vec<u64> = self
            .a()
            .iter()
            .copied()
            .cycle()
            .take(reps * self.n())
            .collect();
        let b: Vec<u64> = self
            .b()
            .iter()
            .copied()
            .cycle()
            .take(reps * self.n())
            .collect();
        WeylLabel::new(&a, &b)
    }

    /// Qubit Pauli string such as `ZXIY` (only meaningful for `d = 2`).
    pub fn pauli_string(&self) -> String {
        self.a()
            .iter()
            .zip(self.b())
            .map(|(&a, &b)| match (a % 2, b % 2) {
                (0, 0) => 'I',
                (1, 0) => 'Z',
                (0, 1) => 'X',
                _ => 'Y',
            })
            .collect()
    }
}

fn check_dims(psi: &PureState, len: usize) -> Result<()> {
    if len != 2 * psi.n() {
        return Err(Error::Shape(format!(
            "Weyl label of length {len} on {} qudits",
            psi.n()
        )));
    }
    Ok(())
}

/// Calls `f(src, dst, zeta_exponent)` for every nonzero entry of `W_x`, where
/// `x` may carry unreduced (lifted) integer coordinates.
pub(crate) fn for_each_entry(
    n: usize,
    d: u64,
    a: &[u64],
    b: &[u64],
    mut f: impl FnMut(usize, usize, i64),
) {
    let du = d as usize;
    let dim = du.pow(n as u32);
    let ab: i64 = a.iter().zip(b).map(|(&x, &y)| (x * y) as i64).sum();
    let global = -tau_in_zeta(ab, d);
    let mut digits = vec![0usize; n];
    for src in 0..dim {
        let mut dst = 0usize;
        let mut aq: i64 = 0;
        for i in 0..n {
            let t = (digits[i] + b[i] as usize) % du;
            dst = dst * du + t;
            aq += (a[i] % d) as i64 * t as i64;
        }
        f(src, dst, global + 2 * aq);
        // increment base-d counter, last digit fastest
        for i in (0..n).rev() {
            digits[i] += 1;
            if digits[i] < du {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// `W_x |psi>` for a label whose coordinates may exceed `d - 1`.
pub fn apply_weyl_lifted(psi: &PureState, label: &[u64]) -> Result<PureState> {
    check_dims(psi, label.len())?;
    let (a, b) = label.split_at(psi.n());
    let d = psi.d();
    let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
    let amps = psi.amps();
    for_each_entry(psi.n(), d, a, b, |src, dst, z| {
        out[dst] = zeta_power(z, d) * amps[src]
    });
    Ok(PureState::from_parts_unchecked(psi.n(), d, out))
}

pub fn apply_weyl(psi: &PureState, x: &WeylLabel) -> Result<PureState> {
    apply_weyl_lifted(psi, &x.0)
}

pub fn weyl_expectation_lifted(psi: &PureState, label: &[u64]) -> Result<Complex64> {
    check_dims(psi, label.len())?;
    let (a, b) = label.split_at(psi.n());
    let d = psi.d();
    let amps = psi.amps();
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_entry(psi.n(), d, a, b, |src, dst, z| {
        acc += amps[dst].conj() * zeta_power(z, d) * amps[src]
    });
    Ok(acc)
}

/// `<psi| W_x |psi>`.
pub fn weyl_expectation(psi: &PureState, x: &WeylLabel) -> Result<Complex64> {
    weyl_expectation_lifted(psi, &x.0)
}

/// The operator `tau^{phase_exp} W_label`, phase exponent kept mod `D`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhasedPauli {
    pub label: WeylLabel,
    pub phase_exp: u64,
    pub d: u64,
}

impl PhasedPauli {
    pub fn new(label: WeylLabel, phase_exp: i64, d: u64) -> Self {
        let big_d = tau_order(d) as i64;
        Self {
            label,
            phase_exp: phase_exp.rem_euclid(big_d) as u64,
            d,
        }
    }

    pub fn identity(n: usize, d: u64) -> Self {
        Self::new(WeylLabel(vec![0; 2 * n]), 0, d)
    }

    /// Exact product `self * other`, using
    /// `W_x W_y = tau^{[x,y]} W_{x+y}` on lifted labels and then folding the
    /// label back into `[0, d)` with the matching tau correction.
    pub fn compose(&self, other: &PhasedPauli) -> PhasedPauli {
        let d = self.d;
        let n = self.label.n();
        let form =
            modlinalg::symplectic_form_int(&self.label.0, &other.label.0).expect("same length");
        let sum: Vec<u64> = self
            .label
            .0
            .iter()
            .zip(&other.label.0)
            .map(|(x, y)| x + y)
            .collect();
        let mut e = self.phase_exp as i64 + other.phase_exp as i64 + form;
        let (sa, sb) = sum.split_at(n);
        for i in 0..n {
            let (a, alpha) = ((sa[i] % d) as i64, (sa[i] / d) as i64);
            let (b, beta) = ((sb[i] % d) as i64, (sb[i] / d) as i64);
            e -= d as i64 * (alpha * b + a * beta + d as i64 * alpha * beta);
        }
        let reduced = WeylLabel(sum.iter().map(|v| v % d).collect());
        PhasedPauli::new(reduced, e, d)
    }

    pub fn phase(&self) -> Complex64 {
        zeta_power(tau_in_zeta(self.phase_exp as i64, self.d), self.d)
    }

    pub fn apply(&self, psi: &PureState) -> Result<PureState> {
        Ok(apply_weyl(psi, &self.label)?.scaled(self.phase()))
    }

    pub fn expectation(&self, psi: &PureState) -> Result<Complex64> {
        Ok(weyl_expectation(psi, &self.label)? * self.phase())
    }

    /// True for `tau^s I`.
    pub fn is_identity_multiple(&self) -> bool {
        self.label.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d == 2 {
            let sign = ["+", "+i", "-", "-i"][self.phase_exp as usize];
            write!(f, "{sign}{}", self.label.pauli_string())
        } else {
            write!(f, "tau^{} W{:?}", self.phase_exp, self.label.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn x_flips_zero() {
        let s = PureState::zero_state(1, 2).unwrap();
        let out = apply_weyl(&s, &WeylLabel(vec![0, 1])).unwrap();
        assert_eq!(out, PureState::basis_state(1, 2, &[1]).unwrap());
    }

    #[test]
    fn w11_is_y_for_qubits() {
        // tau = i for d = 2, W_(1,1) = -i Z X, and -i Z X |0> = i |1>
        let s = PureState::zero_state(1, 2).unwrap();
        let out = apply_weyl(&s, &WeylLabel(vec![1, 1])).unwrap();
        assert!((out.amps()[0]).norm() < 1e-15);
        assert!((out.amps()[1] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn qutrit_shift_wraps() {
        let s = PureState::basis_state(1, 3, &[2]).unwrap();
        let out = apply_weyl(&s, &WeylLabel(vec![0, 1])).unwrap();
        assert!((out.amps()[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn expectation_examples() {
        let zero = PureState::zero_state(1, 2).unwrap();
        let plus = PureState::plus_state(1, 2).unwrap();
        let z = WeylLabel(vec![1, 0]);
        assert!((weyl_expectation(&zero, &z).unwrap() - 1.0).norm() < 1e-15);
        assert!(weyl_expectation(&plus, &z).unwrap().norm() < 1e-15);
        let xx = WeylLabel::new(&[0, 0], &[1, 1]);
        assert!((weyl_expectation(&PureState::bell_pair(), &xx).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn tau_has_the_claimed_order() {
        for d in [2u64, 3, 5, 7] {
            let big_d = tau_order(d) as i64;
            let tau = zeta_power(tau_in_zeta(1, d), d);
            let omega = zeta_power(2, d);
            assert!((tau * tau - omega).norm() < 1e-12);
            assert!((zeta_power(tau_in_zeta(big_d, d), d) - 1.0).norm() < 1e-12);
            for k in 1..big_d {
                assert!((zeta_power(tau_in_zeta(k, d), d) - 1.0).norm() > 1e-6);
            }
        }
    }

    #[test]
    fn pauli_strings() {
        let p = PhasedPauli::new(WeylLabel::new(&[1, 0, 1], &[0, 1, 1]), 2, 2);
        assert_eq!(p.to_string(), "-ZXY");
    }

    #[test]
    fn composition_matches_operator_product_for_qubits() {
        // XZ = -iY: tau^{-1} W_(1,1)
        let x = PhasedPauli::new(WeylLabel(vec![0, 1]), 0, 2);
        let z = PhasedPauli::new(WeylLabel(vec![1, 0]), 0, 2);
        let p = x.compose(&z);
        assert_eq!(p, PhasedPauli::new(WeylLabel(vec![1, 1]), -1, 2));
        // ZY = -iX
        let y = PhasedPauli::new(WeylLabel(vec![1, 1]), 0, 2);
        assert_eq!(
            z.compose(&y),
            PhasedPauli::new(WeylLabel(vec![0, 1]), -1, 2)
        );
    }
}
