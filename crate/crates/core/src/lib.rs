//! Weighted trigonometric regression for unevenly sampled circadian data.
//!
//! The crate fits order-`K` cosinor models
//!
//! ```text
//! y = θ₀ + Σₖ θ₂ₖ₋₁ sin(πkx/12) + θ₂ₖ cos(πkx/12) + ε
//! ```
//!
//! to samples collected at arbitrary clock times, and reweights the samples by
//! the reciprocal of a von Mises kernel density estimate of the collection-time
//! density. The kernel concentration is chosen to maximise the determinant of
//! the weighted information matrix (D-optimality) under cross-validation, which
//! pulls the weighted design towards the equispaced ideal `diag(1, ½, …, ½)`.
//!
//! Everything here is pure computation and builds without `std`; file formats,
//! the command line and parallel drivers live in the `wcosinor` crate.
//!
//! Module map:
//! - [`basis`]: regression functions and amplitude/phase conversion
//! - [`special`]: modified Bessel functions, χ² and F survival functions, normal quantiles
//! - [`kde`]: circular kernel density estimation, including fold-excluded variants
//! - [`design`]: sample weights, information matrices, φₚ criteria, κ selection
//! - [`regression`]: weighted least squares fits and variance estimates
//! - [`inference`]: Wald and F statistics, panel screening, closed-form variance oracle
//! - [`sim`]: simulation settings, samplers and the phase sweep
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod basis;
pub mod design;
pub mod error;
pub mod inference;
pub mod kde;
pub mod linalg;
pub mod regression;
pub mod sim;
pub mod special;

pub use basis::{AmplitudePhase, BasisVector, HarmonicOrder};
pub use design::{InformationMatrix, KappaSearch, KappaSearchResult, PhiP, WeightVector, Weights};
pub use error::{Error, Result};
pub use inference::{FMode, Panel, TestReport};
pub use kde::{FoldAssignment, KdeModel, KernelFamily};
pub use regression::{FitVariance, TrigFit};

/// Hours in one cycle of the modelled rhythm.
pub const PERIOD_HOURS: f64 = 24.0;
