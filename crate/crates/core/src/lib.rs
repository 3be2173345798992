//! Open-system simulation of small bosonic networks whose dissipation is
//! engineered to stabilise entangled states.
//!
//! The pieces, in the order a calculation uses them:
//!
//! - [`network`]: normal modes of coupled oscillators and their baths.
//! - [`states`]: truncated Fock spaces, pure and mixed states, targets.
//! - [`liouvillian`]: channel specs and the sparse Lindblad superoperator.
//! - [`dynamics`]: time evolution, steady states, fidelity and purity.
//! - [`reservoir_engineering`]: from atomic drive parameters to channel
//!   rates, with regime checks and single-atom simulations.
//!
//! Rates are in units of a reference loss rate `γ`, so times are `γt`.

pub mod dynamics;
pub mod error;
pub mod liouvillian;
pub mod network;
pub mod reservoir_engineering;
pub mod states;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/liouvillian.md")]
    mod liouvillian {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/reservoir_engineering.md")]
    mod reservoir_engineering {}
}
