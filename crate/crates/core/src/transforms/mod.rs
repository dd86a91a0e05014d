//! Structured random measurement ensembles with `O(n log n)` apply and adjoint.
//!
//! Two families are provided: bounded orthogonal ensembles (rows sampled with
//! replacement from a Hadamard or real Fourier base whose entries are bounded
//! by one in magnitude) and partial circulant ensembles (rows of the circulant
//! matrix generated by a random sign vector). Both get independent random row
//! signs on top.

mod convolve;
mod ensemble;
mod fwht;
mod signs;

pub use convolve::{circular_convolve, circular_convolve_direct};
pub use ensemble::{EnsembleKind, StructuredEnsemble};
pub use fwht::{fwht, fwht_in_place, hadamard_entry};
pub use signs::{apply_column_signs, SignVector};
