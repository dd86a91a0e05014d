//! Noise-shaping quantization of structured random measurements.
//!
//! The crate builds fast binary embeddings and quantized compressed sensing
//! pipelines out of four pieces:
//!
//! * [`transforms`]: bounded orthogonal (Hadamard, real Fourier) and partial
//!   circulant measurement ensembles with `O(n log n)` apply and adjoint;
//! * [`quantize`]: memoryless, Sigma-Delta and distributed (beta) noise-shaping
//!   quantizers that return the code together with its state vector;
//! * [`condense`]: the block condensation operators that turn noise-shaped
//!   codes into near-isometric low-dimensional vectors;
//! * [`embed`] and [`recover`]: the binary embedding and `l1` reconstruction
//!   pipelines built on top.
//!
//! [`diagnostics`] estimates restricted isometry constants and checks the
//! sign-averaging identity behind them; [`experiment`] drives parameter sweeps
//! and writes CSV results.

pub mod condense;
pub mod diagnostics;
pub mod embed;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod operator;
pub mod quantize;
pub mod recover;
pub mod rng;
pub mod transforms;

pub use error::{Error, Result};
