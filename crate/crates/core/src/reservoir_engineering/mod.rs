//! Effective couplings and engineered rates of an atomic beam, the regime
//! in which they hold, and atom-level checks of both.

mod atom;
mod couplings;
mod regime;

pub use atom::{
    repeated_interaction_check, simulate_atom_pass, AtomPass, RepeatedInteraction,
    MAX_PERTURBATIVE_ZETA_TAU, MIN_R_SQUARED,
};
pub use couplings::{
    effective_couplings, engineered_rate, selectivity_tuning, DriveParams, EffectiveCouplings, Tuning,
};
pub use regime::{
    design_report, validate_regime, validate_regime_with, CheckClass, CheckStatus, DesignReport,
    RateRow, RegimeCheck, RegimeReport, DEFAULT_THRESHOLD,
};
