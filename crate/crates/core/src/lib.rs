//! Structure-preserving finite-volume integrator for a non-isothermal
//! Allen-Cahn tumor growth model with phase field `φ`, temperature `θ` and
//! nutrient `σ`:
//!
//! ```text
//! βφ_t − εΔφ + F′(φ)/ε − θ = (𝒫σ − 𝒜) h(φ)
//! c_V θ_t − div(κ(θ)∇θ) − βφ_t² + θφ_t = 0
//! σ_t − Δσ = −𝒞σh(φ) + ℬ(σ_B − σ)
//! ```
//!
//! on a box with zero-flux boundaries. Each step solves the phase equation by
//! convex-concave splitting, the nutrient equation implicitly, and the
//! temperature equation in Kirchhoff form, so that `θ ≥ 0`, `φ ≥ 0` and
//! `σ ∈ [0, 1]` are preserved and the total entropy never decreases.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod io;
mod linalg;
pub mod stepper;
pub mod verification;

pub use constitutive::{ModelParams, Regulator};
pub use diagnostics::{
    continuous_dependence_test, energy_balance_residual, entropy_increment, internal_energy,
    stability_functional, total_entropy, Bounds, DependenceReport,
};
pub use error::{Error, ErrorClass, Result};
pub use grid::{Field, Grid};
pub use stepper::{advance, advance_adaptive, run, State, StepControls, StepReport};
