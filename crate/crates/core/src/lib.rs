//! Steerable differential beamformer design for linear superarrays.
//!
//! A linear superarray mixes omnidirectional and first-order directional
//! microphones along a line. This crate provides:
//!
//! - [`specfun`]: integer-order Bessel functions of the first kind.
//! - [`array`]: element patterns, the manifold vector, beampattern, white
//!   noise gain, directivity factor and the 2D diffuse-noise coherence matrix.
//! - [`idp`]: ideal directivity patterns and their decomposition into the
//!   exponential / `sin θ`-weighted exponential bases.
//! - [`beamformer`]: the truncated Jacobi–Anger design system and its
//!   minimum-norm solution.
//! - [`metrics`]: per-direction and broadband approximation error.
//! - [`ga`]: a real-coded genetic algorithm jointly optimizing positions and
//!   element directivity.
//! - [`evaluation`]: frequency/steering sweeps, polar cuts and baselines.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. With `std`, grid evaluations run on the rayon thread pool.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod array;
pub mod beamformer;
pub mod error;
pub mod evaluation;
pub mod ga;
pub mod idp;
pub mod linalg;
pub mod metrics;
mod par;
pub mod specfun;

pub use array::{ArrayConfig, ArrayLimits, PhysicalConstants, SteeringContext};
pub use beamformer::{DesignSettings, DesignSystem, FilterBank};
pub use error::{Error, Result};
pub use ga::{GaOutcome, GaParams, GaRunState, OptimizationProblem, Optimizer};
pub use idp::{IdpCoefficients, IdpSpec};
pub use metrics::DesignGrid;

pub use num_complex::Complex64;
