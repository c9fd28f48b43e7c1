//! Minimal environment encodings for open-quantum-system simulation.
//!
//! The crate builds small environments whose operators reproduce the
//! reservoir correlation functions of a larger bath, evolves
//! system-plus-environment states with optional environment relaxation,
//! and estimates the circuit resources needed to run the same evolution
//! on qubits.

pub mod bath;
pub mod encoding;
pub mod error;
pub mod fourier;
pub mod linalg;
pub mod evolution;
pub mod experiment;
pub mod minspace;
pub mod reference;
pub mod resources;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
