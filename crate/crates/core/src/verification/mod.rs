//! Re-derivation checks over a drawn event and the fairness audit.

mod fairness;
mod report;

pub use fairness::{
    audit_seed_schedule, chi_square_uniformity, run_fairness_trial, run_fairness_trial_with,
    z_score, ChiSquare, FairnessError, FairnessReport, ParticipantTally, DEFAULT_Z_MAX,
    MIN_RUNS,
};
pub use report::{verify_event, CheckFailure, VerificationError, VerificationReport, CHECKS};
