//! Noisy simulation of virtual distillation across a trapped-ion network.
//!
//! Qubits are little-endian throughout: qubit 0 is the least significant
//! bit of an amplitude index.

pub mod circuit;
pub mod error;
pub mod estimator;
pub mod gates;
pub mod heisenberg;
pub mod network;
pub mod noise;
pub mod scalar;
pub mod sim;
pub mod vd;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision state, the default for every experiment.
pub type State = sim::QuantumState<f64>;
/// Single-precision state for memory-bound runs.
pub type State32 = sim::QuantumState<f32>;
pub type Mat = sim::Matrix<f64>;
