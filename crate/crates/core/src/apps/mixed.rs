use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charpovm::{q_distribution, Copies, MixedState, Representation};
use crate::error::Result;
use crate::fgroup::{GroupElement, Subgroup};
use crate::qstate::PureState;

pub const MIXED_SCHEMA: &str = "mixeddemo/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedCase {
    pub description: String,
    /// `tr(SWAP rho)`.
    pub swap_expectation: f64,
    /// `q_rho(H^perp)` for `H` the full swap group.
    pub mass_on_h_perp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedDemoReport {
    pub schema: String,
    pub h: Subgroup,
    /// Invariant under conjugation by SWAP, but `tr(SWAP rho) < 1`.
    pub conjugation_invariant: MixedCase,
    /// Mixture of +1 eigenvectors: `tr(SWAP rho) = 1`.
    pub strong_condition: MixedCase,
    /// Pure symmetric state through the same path.
    pub pure: MixedCase,
    /// The pure state as a one-component mixture gives the same distribution.
    pub pure_matches_state_path: bool,
}

impl MixedDemoReport {
    /// The weak symmetry notion loses mass off `H^perp`, the strong one and
    /// the pure case do not.
    pub fn demonstrates_failure(&self) -> bool {
        self.conjugation_invariant.mass_on_h_perp < 0.9
            && (self.strong_condition.mass_on_h_perp - 1.0).abs() < 1e-9
            && (self.pure.mass_on_h_perp - 1.0).abs() < 1e-9
            && self.pure_matches_state_path
    }
}

fn basis(bits: &[u64]) -> PureState {
    PureState::basis_state(bits.len(), 2, bits).expect("two qubits")
}

fn case(
    rep: &Representation,
    h_perp: &Subgroup,
    rho: &MixedState,
    description: &str,
) -> Result<MixedCase> {
    let q = rho.q_distribution(rep)?;
    let swap = rho.expectation(rep, &GroupElement(vec![1]))?;
    Ok(MixedCase {
        description: description.into(),
        swap_expectation: swap.re,
        mass_on_h_perp: q.mass(h_perp),
    })
}

/// Two qubits with `Z_2` acting by SWAP (the translation family at `n = 2`).
pub fn mixed_state_failure_demo() -> Result<MixedDemoReport> {
    let rep = Representation::translation(2)?;
    let h = Subgroup::full(rep.spec());
    let h_perp = h.annihilator();
    let weak = MixedState::new(vec![(0.5, basis(&[0, 1])), (0.5, basis(&[1, 0]))])?;
    let strong = MixedState::new(vec![(0.5, basis(&[0, 0])), (0.5, basis(&[1, 1]))])?;
    let s = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let triplet = PureState::new(2, 2, vec![zero, s, s, zero])?;
    let pure = MixedState::pure(triplet.clone());
    let via_state = q_distribution(&rep, &Copies::Identical(&triplet))?;
    let via_mixture = pure.q_distribution(&rep)?;
    Ok(MixedDemoReport {
        schema: MIXED_SCHEMA.into(),
        conjugation_invariant: case(&rep, &h_perp, &weak, "(|01><01| + |10><10|)/2")?,
        strong_condition: case(&rep, &h_perp, &strong, "(|00><00| + |11><11|)/2")?,
        pure: case(&rep, &h_perp, &pure, "(|01> + |10>)/sqrt2")?,
        pure_matches_state_path: via_state.total_variation(&via_mixture) < 1e-12,
        h,
    })
}
