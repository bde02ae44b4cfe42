//! Convolutional nonnegative matrix factorization under the β-divergence.
//!
//! The crate is `no_std` (with `alloc`) and carries the numerical core:
//! dense nonnegative matrices with the shift and entrywise operations the
//! update rules are built from, the β-divergence loss, the exact
//! multiplicative updates for the convolutional model, the four prior-art
//! update schemes, synthetic data generators, and the statistics
//! (Welch's t-test, streaming moments) used to compare convergence.
//!
//! File formats, CSV output, timing, and the CLI live in the companion
//! `betacnmf` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod betadiv;
pub mod cnmf;
pub mod error;
pub mod nnmat;
pub mod rng;
pub mod stats;
pub mod synth;

pub use baselines::Method;
pub use betadiv::{d_beta, divergence, Beta};
pub use cnmf::{ConvDictionary, FactorizationState, FitOptions, HUpdateWeights};
pub use error::Error;
pub use nnmat::NonnegMatrix;
pub use rng::Rng;

/// Default clamp floor shared by the loss and every update rule.
pub const DEFAULT_EPS: f64 = 1e-12;
