//! Parameter containers, activation functions and feed-forward complex networks.

pub mod activation;
pub mod ffn;
pub mod params;

pub use activation::{activate, perceptron_nand, smoothed_step, Activation};
pub use ffn::{ffn_amplitude, DenseLayer, FeedForwardNet};
pub use params::{Layer, NetworkParameters, VertexId};
