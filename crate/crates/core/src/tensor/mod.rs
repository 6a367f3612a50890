//! Tensor-network views of RBM states: dense tensors, the RBM network of
//! vertex and edge tensors, and exact conversion of local RBMs to MPS.

mod dense;
mod mps;
mod network;

pub use dense::DenseTensor;
pub use mps::{mps_amplitude, rbm_to_mps, MpsBoundary, MpsConversion, MpsState, SiteTensor, DEFAULT_MAX_BOND, SVD_CUTOFF};
pub use network::{rbm_to_tensor_network, TensorNetwork};
