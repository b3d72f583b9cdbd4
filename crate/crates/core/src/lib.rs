//! Free-fermion solution of the periodic spin-1/2 XX chain with an XZY-YZX
//! three-spin interaction in a transverse field.
//!
//! The crate computes ground-state quantum-information metrics (l1-norm of
//! coherence, spin squeezing, entanglement entropy, concurrence) from the
//! Jordan-Wigner fermion correlation functions, and cross-checks them with an
//! exact-diagonalization oracle for short chains. It is `no_std` and only
//! needs an allocator.
//!
//! Typical use:
//!
//! ```
//! use tsi_chain::model::ModelParams;
//! use tsi_chain::observables::{evaluate_point, MetricSelection, SspMode};
//!
//! let params = ModelParams::new(2.0, 0.3, 64).unwrap();
//! let rec = evaluate_point(&params, MetricSelection::all(), SspMode::Exact).unwrap();
//! assert!(rec.ssp.unwrap() > 0.0);
//! ```

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod correlators;
mod error;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod pfaffian;

pub use error::{Error, Result};
pub use num_complex::Complex64;
