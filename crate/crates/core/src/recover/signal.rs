use rand::seq::index;

use crate::error::{invalid, Result};
use crate::linalg::{norm2, norm_inf};
use crate::rng::{gaussian_vec, rng_from_seed};
use crate::transforms::StructuredEnsemble;

/// Largest admissible `||Phi x||_inf` for generated test signals.
pub const MEASUREMENT_BOUND: f64 = 8.0 / 9.0;

/// A `k`-sparse vector in `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSignal {
    pub n: usize,
    pub support: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseSignal {
    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            x[i] = v;
        }
        x
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            support: Vec::new(),
            values: Vec::new(),
        }
    }
}

/// Draws a `k`-sparse signal with a uniformly random support and Gaussian
/// values, normalized to unit norm and then shrunk by the largest factor
/// `c <= 1` with `||Phi (c x)||_inf <= 8/9`.
pub fn generate_sparse_signal(
    n: usize,
    k: usize,
    seed: u64,
    ensemble: &StructuredEnsemble,
) -> Result<SparseSignal> {
    if k > n {
        return Err(invalid(format!("sparsity {k} exceeds dimension {n}")));
    }
    if ensemble.n() != n {
        return Err(invalid("signal dimension does not match the ensemble"));
    }
    let mut rng = rng_from_seed(seed);
    let mut support = index::sample(&mut rng, n, k).into_vec();
    support.sort_unstable();
    let mut values = gaussian_vec(&mut rng, k);
    let nv = norm2(&values);
    if nv > 0.0 {
        values.iter_mut().for_each(|v| *v /= nv);
    }
    let mut signal = SparseSignal { n, support, values };

    // Phi is linear, so the admissible scale is a ratio; the loop only
    // absorbs rounding in the product.
    let peak = norm_inf(&ensemble.apply(&signal.to_dense())?);
    if peak > MEASUREMENT_BOUND {
        let mut c = MEASUREMENT_BOUND / peak;
        loop {
            let scaled: Vec<f64> = signal.values.iter().map(|v| v * c).collect();
            let candidate = SparseSignal {
                values: scaled,
                ..signal.clone()
            };
            if norm_inf(&ensemble.apply(&candidate.to_dense())?) <= MEASUREMENT_BOUND {
                signal = candidate;
                break;
            }
            c *= 1.0 - 1e-12;
        }
    }
    Ok(signal)
}
