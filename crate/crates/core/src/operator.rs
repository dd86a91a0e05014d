//! Matrix-free linear operators.

use crate::condense::Condenser;
use crate::error::{check_len, Result};
use crate::linalg::{norm2, scale, DenseMatrix};
use crate::rng::{gaussian_vec, rng_from_seed};
use crate::transforms::StructuredEnsemble;

/// A real linear map given only through its action and the action of its
/// transpose.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>>;
}

impl LinearOperator for StructuredEnsemble {
    fn nrows(&self) -> usize {
        self.m()
    }

    fn ncols(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        StructuredEnsemble::apply(self, x)
    }

    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        StructuredEnsemble::apply_adjoint(self, y)
    }
}

impl LinearOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        DenseMatrix::nrows(self)
    }

    fn ncols(&self) -> usize {
        DenseMatrix::ncols(self)
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("dense apply", self.ncols(), x.len())?;
        Ok(self.matvec(x))
    }

    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("dense adjoint", self.nrows(), y.len())?;
        Ok(self.matvec_transpose(y))
    }
}

/// The composition `V Phi` of a condenser with a measurement ensemble.
#[derive(Clone, Copy, Debug)]
pub struct CondensedOperator<'a> {
    pub ensemble: &'a StructuredEnsemble,
    pub condenser: &'a Condenser,
}

impl<'a> CondensedOperator<'a> {
    pub fn new(ensemble: &'a StructuredEnsemble, condenser: &'a Condenser) -> Result<Self> {
        check_len("condensed operator", ensemble.m(), condenser.m())?;
        Ok(Self {
            ensemble,
            condenser,
        })
    }
}

impl LinearOperator for CondensedOperator<'_> {
    fn nrows(&self) -> usize {
        self.condenser.p()
    }

    fn ncols(&self) -> usize {
        self.ensemble.n()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.condenser.condense(&self.ensemble.apply(x)?)
    }

    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.ensemble
            .apply_adjoint(&self.condenser.condense_adjoint(y)?)
    }
}

/// Materializes an operator column by column.
pub fn materialize(op: &dyn LinearOperator) -> Result<DenseMatrix> {
    let (rows, cols) = (op.nrows(), op.ncols());
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut e = vec![0.0; cols];
    for j in 0..cols {
        e[j] = 1.0;
        let col = op.apply(&e)?;
        e[j] = 0.0;
        for (i, v) in col.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Power-method estimate of the spectral norm `||A||_2`.
pub fn estimate_norm(op: &dyn LinearOperator, iterations: usize, seed: u64) -> Result<f64> {
    let mut x = gaussian_vec(&mut rng_from_seed(seed), op.ncols());
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let nx = norm2(&x);
        if nx == 0.0 {
            return Ok(0.0);
        }
        x = scale(&x, 1.0 / nx);
        let ax = op.apply(&x)?;
        estimate = norm2(&ax);
        x = op.apply_adjoint(&ax)?;
    }
    Ok(estimate)
}
