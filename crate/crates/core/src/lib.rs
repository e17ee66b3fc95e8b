//! Simulation toolkit for the abelian state hidden subgroup problem.
//!
//! Character-POVM output distributions are computed exactly on dense state
//! vectors and sampled, the sampled characters are post-processed into the
//! hidden subgroup, and the learners for stabilizer groups, entanglement cuts,
//! translation periods and blocked global symmetries are built on top.

pub mod apps;
pub mod charpovm;
pub mod error;
pub mod fgroup;
pub mod harness;
pub mod hsp;
pub mod modlinalg;
pub mod qstate;

pub use error::{Error, Result};
