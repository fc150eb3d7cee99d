//! Distributional fixed points of power-bias transformations: symbolic
//! distributions with exact and quadrature-based functionals, reproducible
//! parallel sampling, and statistical checks of the characterizing
//! identities for Gaussian, exponential and gamma laws.

// Negated comparisons are how NaN parameters get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beta_gamma;
pub mod dist;
pub mod error;
pub mod geometry;
pub mod mc;
pub mod metrics;
pub mod quadrature;
pub mod stein;
pub mod transforms;

pub use dist::{DistSpec, Kind, Law, Sampler, SamplingOptions};
pub use error::{Error, Result};
pub use mc::{
    derive_seed, parallel_sample, parallel_sample_with, sample, stream, MonteCarlo, RngStream, SampleBatch,
};
pub use metrics::CheckReport;
