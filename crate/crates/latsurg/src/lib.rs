//! Resource modelling for surface-code quantum computation driven by lattice
//! surgery and 15-to-1 magic-state distillation.
//!
//! The crate is organised around the pipeline a compilation backend would use:
//!
//! * [`model`] — code distances, patch footprints, physical-machine assumptions.
//! * [`rates`] — closed-form logical/distillation error-rate formulas.
//! * [`distill`] — exact enumeration and Monte-Carlo simulation of the
//!   15-to-1 distillation circuit's Z-error response.
//! * [`surgery`] — a patch-grid instruction set with round-accurate durations,
//!   byproduct bits, Pauli-frame bookkeeping, and schedule validation/export.
//! * [`verify`] — stabilizer-tableau and dense-state replay of scheduled
//!   gadgets against their target unitaries.
//! * [`factory`] — a pipelined two-level distillation factory built out of
//!   [`surgery`] schedules.
//! * [`estimate`] — end-to-end qubit/runtime estimates with an error-budget
//!   ledger and sensitivity scans.
//! * [`report`] — the serializable envelopes the CLI emits.
//!
//! Scalar-valued formulas are generic over [`num::Real`] (`f32` or `f64`);
//! the aliases below pin the common `f64` instantiations.

pub mod distill;
pub mod estimate;
pub mod factory;
pub mod model;
pub mod num;
pub mod rates;
pub mod report;
pub mod surgery;
pub mod verify;

pub use model::{CodeDistance, PatchFootprint, PhysicalAssumptions};
pub use num::Real;

/// `f64` machine assumptions, the default for all CLI paths.
pub type Assumptions = PhysicalAssumptions<f64>;
/// `f64` factory model.
pub type Factory = factory::FactoryModel<f64>;
/// `f64` resource estimate.
pub type Estimate = estimate::ResourceEstimate<f64>;
