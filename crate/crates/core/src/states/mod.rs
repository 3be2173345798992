//! Truncated multimode Fock spaces and the states that live in them.

mod density;
mod operators;
mod space;
mod targets;

pub use density::{DensityOperator, StateVector};
pub use operators::{ladder_ops, number_op, selective_ops};
pub use space::{default_cutoffs, TruncatedSpace};
pub use targets::{target_state, thermal_state, to_natural_basis, TargetKind, TargetState, DEFAULT_EXCITATION_LIMIT};

use serde::{Deserialize, Serialize};

/// Which set of modes a state is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Normal modes `A_m` of the network.
    Normal,
    /// The physical oscillators `a_m`.
    Natural,
}
