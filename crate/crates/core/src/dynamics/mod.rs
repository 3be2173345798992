//! Time evolution, steady states and observables.

mod evolve;
mod observables;
mod steady;

pub use evolve::{evolve, EvolveOptions, Trajectory, DEFAULT_DT_SCALE};
pub use observables::{fidelity, purity};
pub use steady::{
    steady_state, SteadyStateMethod, SteadyStateOptions, SteadyStateResult, DENSE_LIMIT, DIRECT_LIMIT,
};

