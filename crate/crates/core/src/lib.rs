//! Gain-score identification of sibling spillover effects.
//!
//! Sibling pairs share a family-level confounder `U`. Regressing the
//! within-pair gain score `D = Y2 - Y1` on both siblings' exposures gives
//! partial coefficients `b1`, `b2` whose sum, the spillover coefficient
//! `SC = b1 + b2`, recovers the effect θ of sibling 1's exposure on sibling
//! 2's outcome when spillover runs one way only.
//!
//! The crate covers the whole chain: linear path models and path queries
//! ([`graph`], [`presets`]), implied population moments ([`moments`]),
//! estimation from data ([`estimator`]), Monte Carlo study ([`simulator`])
//! and identification analysis ([`analyzer`]). It is `no_std` and needs only
//! `alloc`.

#![no_std]

extern crate alloc;

pub mod analyzer;
pub mod error;
pub mod estimator;
pub mod graph;
pub mod moments;
pub mod presets;
pub mod rng;
pub mod simulator;
pub mod stats;

pub use error::{Error, ErrorClass, Result};
pub use graph::{build_model, Edge, ModelSpec, PathModel, Variable, VariableKind};
pub use presets::{Param, Preset, StructuralParams};
