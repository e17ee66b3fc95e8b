use rand::Rng;

use super::{tau_order, PhasedPauli, PureState};
use crate::error::{Error, Result};
use crate::modlinalg;

/// Haar-random vector projected onto the joint +1 eigenspace of `generators`
/// and normalized.
pub fn code_state<R: Rng + ?Sized>(
    generators: &[PhasedPauli],
    n: usize,
    d: u64,
    rng: &mut R,
) -> Result<PureState> {
    for (i, g) in generators.iter().enumerate() {
        if g.d != d || g.label.0.len() != 2 * n {
            return Err(Error::Shape(format!(
                "generator {i} does not act on {n} qudits of dimension {d}"
            )));
        }
        for h in &generators[i + 1..] {
            if modlinalg::symplectic_form(&g.label.0, &h.label.0, d)? != 0 {
                return Err(Error::InfeasibleCode(format!(
                    "generators {g} and {h} do not commute"
                )));
            }
        }
    }
    let big_d = tau_order(d) as usize;
    let mut v = PureState::haar_random(n, d, rng)?;
    for g in generators {
        // (1/D) sum_k g^k projects onto the +1 eigenspace since g^D = I
        let mut acc = v.amps().to_vec();
        let mut cur = v.clone();
        for _ in 1..big_d {
            cur = g.apply(&cur)?;
            acc.iter_mut().zip(cur.amps()).for_each(|(s, c)| *s += c);
        }
        acc.iter_mut().for_each(|s| *s /= big_d as f64);
        v = PureState::from_parts_unchecked(n, d, acc);
    }
    if v.norm() < 1e-8 {
        return Err(Error::InfeasibleCode("joint +1 eigenspace is empty".into()));
    }
    PureState::from_unnormalized(n, d, v.amps().to_vec())
}
