//! Pointwise-adaptive kernel density estimation for weakly dependent samples.
//!
//! The [`gl`] module implements Goldenshluger–Lepski bandwidth selection on a
//! dyadic bandwidth grid. [`competitors`] holds the global cross-validation
//! and rule-of-thumb selectors, [`processes`] the three target densities and
//! dependence regimes used to benchmark them, and [`bench`] the Monte-Carlo
//! integrated-squared-error harness.

pub mod bench;
pub mod cli;
pub mod competitors;
pub mod error;
pub mod gl;
pub mod kernels;
pub mod processes;
pub mod quadrature;
pub mod seed;

pub use error::{Error, Result};
pub use gl::{BandwidthGrid, GlConfig, PointEstimate};
pub use kernels::{registry, Kernel, KernelShape};
pub use processes::{DensityModel, DependenceCase, ProcessSpec, Target};

/// Formats a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
