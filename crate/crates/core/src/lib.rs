//! Recursive antisymmetrization circuits for first-quantized fermions.
//!
//! Builders for the deterministic and measurement-based variants, Clifford+T
//! lowering, single-qubit rotation synthesis, statevector and noisy
//! density-matrix simulation, a permutation-sum oracle, and closed-form
//! resource formulas.

pub mod ancilla;
pub mod builder;
pub mod circuit;
pub mod config;
pub mod error;
pub mod experiments;
pub mod lower;
pub mod resources;
pub mod sim;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
