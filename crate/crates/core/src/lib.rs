//! Location-adjusted Wald inference for scalar parameters of parametric
//! regression models.
//!
//! The Wald statistic `t = (ψ̂ − ψ₀)/κ(θ̂)` is treated as an estimate of the
//! Wald transform `T(θ; ψ₀) = (ψ − ψ₀)/κ(θ)`. Subtracting an estimate of the
//! first-order bias of that estimator gives the location-adjusted statistic
//! `t* = t − B(θ̂; ψ₀)`, whose null expectation is `O(n^{-3/2})`. The same
//! construction applies to reduced-bias estimators (`t̃`, `t̃*`).
//!
//! The crate is `no_std` (with `alloc`). It contains the numerics, the
//! model-agnostic machinery in [`wald`], built-in models
//! ([`oneparam`], [`glm`], [`beta`]) and the inference layer ([`inference`]).
//! IO, the CLI and parallel drivers live in the `adjwald` crate.

#![no_std]
// Test builds unify dev-dependency features that link std, whose inherent
// float methods then shadow the `num_traits::Float` imports.
#![allow(unused_imports)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod beta;
pub mod datasets;
pub mod error;
pub mod glm;
pub mod inference;
pub mod numkit;
pub mod oneparam;
pub mod wald;

pub use error::{Error, Result};
pub use numkit::linalg::Matrix;
pub use wald::{location_adjusted_wald, DerivativePath, EstimatorKind, FitResult, ModelAdapter, Resample, WaldReport};
