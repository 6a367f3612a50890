//! Neural-network quantum states.
//!
//! Boltzmann-machine and feed-forward wavefunctions with complex parameters,
//! variational ground-state search, RBM to MPS conversion, quantum-circuit
//! simulation by deep-Boltzmann-machine growth, neural state tomography and
//! entanglement diagnostics. Every module is checked against brute-force
//! dense references at small sizes.
//!
//! Basis states are indexed big-endian: site 0 is the most significant bit.

pub mod bm;
pub mod circuit;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod exact;
pub mod hamiltonian;
pub mod linalg;
pub mod net;
pub mod spin;
pub mod state;
pub mod tomo;
pub mod tensor;
pub mod vmc;

pub use error::{NqsError, Result};
pub use spin::{Convention, SpinConfiguration};
pub use state::{LogAmplitude, NqsState, Variational, C64};
