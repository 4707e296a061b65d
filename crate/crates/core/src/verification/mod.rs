//! Independent oracles: manufactured solutions, an explicit reference
//! integrator and dense small-system solvers.

pub mod dense;
pub mod explicit;
pub mod mms;

pub use dense::{dense_small_solve, DenseSubstep};
pub use explicit::{
    compare_with_explicit, explicit_reference, explicit_stable_dt, reference_dt, OracleReport,
};
pub use mms::{
    run_mms, run_mms_temporal, ConvergenceReport, ManufacturedCase, TemporalReport, MMS_T_FINAL,
};
