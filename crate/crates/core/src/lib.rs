//! Gaussian orthogonal, unitary and symplectic tensor ensembles.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`] stores cubic tensors on canonical (sorted) multi-indices for the
//!   four symmetry classes and converts to and from dense form.
//! * [`group`] samples Haar elements of O(N), U(N) and USp(2N) and applies the
//!   multilinear similarity actions.
//! * [`ensemble`] samples GOTE/GUTE/GSTE(β, γ) and evaluates their log-densities.
//! * [`invariant`] builds trace-invariant multigraphs and evaluates them with a
//!   contraction planner.
//! * [`harness`] runs the statistical verification suites.
//!
//! Indices are 0-based in the API and 1-based in the JSON formats of [`io`].

#![allow(clippy::needless_range_loop)]

pub mod ensemble;
pub mod error;
pub mod group;
pub mod harness;
pub mod invariant;
pub mod io;
pub mod par;
pub mod stats;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Version of the JSON interchange formats written by [`io`].
pub const FORMAT_VERSION: &str = "1";
