//! Learners built on the generic solver: stabilizer groups and codes,
//! entanglement cuts, translation periods and blocked global symmetries.

mod cut;
mod mixed;
mod stabilizer;
mod translation;

pub use cut::{
    learn_hidden_cut, partition_to_subgroup, subgroup_to_partition, CutResult, CUT_SCHEMA,
};
pub use mixed::{mixed_state_failure_demo, MixedCase, MixedDemoReport, MIXED_SCHEMA};
pub use stabilizer::{
    is_free_of_identity_multiples, learn_global_symmetry, learn_stabilizer_group, lifted_gap,
    phased_closure, round_phase, StabilizerGroupResult, STAB_SCHEMA,
};
pub use translation::{
    learn_translation, period_from_samples, period_subgroup, TranslationResult, TRANS_SCHEMA,
};
