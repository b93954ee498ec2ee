//! Two-variable urea-urease pH oscillator: vector fields, a stiff
//! integrator, fast-slow (fold) analysis and limit-cycle timing.
//!
//! The model is
//!
//! ```text
//! ds/dt = -r(h) s + K_s
//! dh/dt = -q(s, h) + K_h (1 - h)
//! ```
//!
//! with a bell-shaped catalytic rate `r` and an ammonium production rate `q`
//! given by the non-negative root of a quadratic. Two small parameters are
//! tied to a single `eps`; the analysis works in two rescaled charts that
//! resolve the acidic fold `F_A` and the near-neutral fold `F_B`.

// Domain guards are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cycle;
pub mod error;
pub mod gspt;
pub mod integrator;
pub mod model;
pub mod params;

pub use error::{AnalysisError, IntegrationError, ModelError, ParamError};
pub use params::{DimlessParams, EpsSplit, PhysicalParams, DEFAULT_EPS_REF};
