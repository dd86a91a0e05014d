//! Condensation operators `V = I_p ⊗ v` and the pseudo-metric they induce.
//!
//! A code of length `m = p * lambda` is cut into `p` consecutive blocks of
//! length `lambda`; each block is collapsed to one number by a dot product
//! with the row vector `v`. Two normalizations are used downstream: the
//! "tilde" one (`9 / (8 ||v||_2 sqrt(p))`) for embeddings and the "hat" one
//! (`1 / (||v||_2 sqrt(p))`) for recovery.

use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::{norm1, norm2, sub};

/// Normalization applied on top of `I_p ⊗ v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scaling {
    Raw,
    /// `9 / (8 ||v||_2 sqrt(p))`, used by the embedding pseudo-metric.
    Tilde,
    /// `1 / (||v||_2 sqrt(p))`, used by the recovery program.
    Hat,
}

/// Which quantizer the condensation vector is matched to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Flavor {
    /// Coefficients of `(1 + z + ... + z^{lambda_tilde - 1})^r`.
    SigmaDelta { order: u32, lambda_tilde: usize },
    /// `(beta^-1, ..., beta^-lambda)`.
    Beta { beta: f64 },
    /// Any user-provided vector.
    Custom,
}

/// Coefficients of `(1 + z + ... + z^{lambda_tilde - 1})^r`, a vector of
/// length `r * lambda_tilde - r + 1`.
pub fn sd_condensation_vector(order: u32, lambda_tilde: usize) -> Result<Vec<f64>> {
    if order == 0 || lambda_tilde == 0 {
        return Err(invalid("need r >= 1 and lambda_tilde >= 1"));
    }
    let ones = vec![1.0; lambda_tilde];
    let mut v = vec![1.0];
    for _ in 0..order {
        let mut next = vec![0.0; v.len() + lambda_tilde - 1];
        for (i, a) in v.iter().enumerate() {
            for (j, b) in ones.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        v = next;
    }
    Ok(v)
}

/// `(beta^-1, beta^-2, ..., beta^-lambda)`.
pub fn beta_condensation_vector(beta: f64, lambda: usize) -> Result<Vec<f64>> {
    if !(beta.is_finite() && beta > 0.0) || lambda == 0 {
        return Err(invalid("need beta > 0 and lambda >= 1"));
    }
    Ok((1..=lambda).map(|j| beta.powi(-(j as i32))).collect())
}

/// Solves `lambda = r * lambda_tilde - r + 1` for `lambda_tilde`.
pub fn sd_lambda_tilde(order: u32, lambda: usize) -> Result<usize> {
    let r = order as usize;
    if r == 0 || lambda == 0 {
        return Err(invalid("need r >= 1 and lambda >= 1"));
    }
    let shifted = lambda + r - 1;
    if shifted % r != 0 {
        return Err(invalid(format!(
            "lambda = {lambda} is not of the form r * k - r + 1 for r = {order}"
        )));
    }
    Ok(shifted / r)
}

/// The block condensation operator `scale * (I_p ⊗ v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Condenser {
    v: Vec<f64>,
    p: usize,
    scaling: Scaling,
    flavor: Flavor,
}

impl Condenser {
    pub fn new(v: Vec<f64>, p: usize, scaling: Scaling, flavor: Flavor) -> Result<Self> {
        if v.is_empty() || p == 0 {
            return Err(invalid("condenser needs a non-empty v and p >= 1"));
        }
        if norm2(&v) == 0.0 || v.iter().any(|x| !x.is_finite()) {
            return Err(invalid("condensation vector must be finite and non-zero"));
        }
        Ok(Self {
            v,
            p,
            scaling,
            flavor,
        })
    }

    pub fn from_vector(v: Vec<f64>, p: usize, scaling: Scaling) -> Result<Self> {
        Self::new(v, p, scaling, Flavor::Custom)
    }

    /// Sigma-Delta condenser from `(r, lambda_tilde)`.
    pub fn sigma_delta(order: u32, lambda_tilde: usize, p: usize, scaling: Scaling) -> Result<Self> {
        let v = sd_condensation_vector(order, lambda_tilde)?;
        Self::new(v, p, scaling, Flavor::SigmaDelta { order, lambda_tilde })
    }

    /// Sigma-Delta condenser for a target block length `lambda`.
    pub fn sigma_delta_for_lambda(order: u32, lambda: usize, p: usize, scaling: Scaling) -> Result<Self> {
        Self::sigma_delta(order, sd_lambda_tilde(order, lambda)?, p, scaling)
    }

    pub fn beta(beta: f64, lambda: usize, p: usize, scaling: Scaling) -> Result<Self> {
        let v = beta_condensation_vector(beta, lambda)?;
        Self::new(v, p, scaling, Flavor::Beta { beta })
    }

    /// Same operator with another normalization.
    pub fn with_scaling(&self, scaling: Scaling) -> Self {
        Self {
            scaling,
            ..self.clone()
        }
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn lambda(&self) -> usize {
        self.v.len()
    }

    /// Input length `m = p * lambda`.
    pub fn m(&self) -> usize {
        self.p * self.v.len()
    }

    pub fn scaling(&self) -> Scaling {
        self.scaling
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Scalar multiplying `I_p ⊗ v`.
    pub fn scale(&self) -> f64 {
        let base = norm2(&self.v) * (self.p as f64).sqrt();
        match self.scaling {
            Scaling::Raw => 1.0,
            Scaling::Tilde => 9.0 / (8.0 * base),
            Scaling::Hat => 1.0 / base,
        }
    }

    /// `gamma = ||v||_1 / ||v||_2`.
    pub fn gamma(&self) -> f64 {
        norm1(&self.v) / norm2(&self.v)
    }

    /// Applies the (scaled) condensation operator to a length-`m` vector.
    pub fn condense(&self, q: &[f64]) -> Result<Vec<f64>> {
        check_len("condense", self.m(), q.len())?;
        let s = self.scale();
        Ok(q.chunks_exact(self.lambda())
            .map(|block| s * block.iter().zip(&self.v).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    }

    /// Transpose of [`Condenser::condense`]: spreads each entry of `z` over
    /// its block with weights `scale * v`.
    pub fn condense_adjoint(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len("condense adjoint", self.p, z.len())?;
        let s = self.scale();
        Ok(z.iter()
            .flat_map(|&zl| self.v.iter().map(move |&vj| s * vj * zl))
            .collect())
    }

    /// `||scale * V (q - q')||_2`.
    pub fn pseudo_metric(&self, q: &[f64], other: &[f64]) -> Result<f64> {
        check_len("pseudo-metric", q.len(), other.len())?;
        Ok(norm2(&self.condense(&sub(q, other))?))
    }
}

/// `||scale * V (q - q')||_2` for the condenser's own normalization.
pub fn pseudo_metric(condenser: &Condenser, q: &[f64], other: &[f64]) -> Result<f64> {
    condenser.pseudo_metric(q, other)
}

/// Row `l1` norms of the materialized `V D^r` for an `m`-sample signal,
/// where `D` is the first-order difference matrix. Oracle only; refuses
/// `m > 2^15`.
pub fn vdr_row_l1_norms(condenser: &Condenser, order: u32, m: usize) -> Result<Vec<f64>> {
    check_len("V D^r", condenser.m(), m)?;
    if m > 1 << 15 {
        return Err(Error::Budget(format!("m = {m} exceeds 2^15")));
    }
    let r = order as usize;
    // Row i of D^r has (-1)^k C(r, k) at column i - k.
    let mut binom = vec![1.0];
    for _ in 0..r {
        let mut next = vec![1.0; binom.len() + 1];
        for i in 1..binom.len() {
            next[i] = binom[i - 1] + binom[i];
        }
        binom = next;
    }
    let lambda = condenser.lambda();
    let s = condenser.scale();
    let mut norms = Vec::with_capacity(condenser.p());
    let mut row = vec![0.0; m];
    for l in 0..condenser.p() {
        row.iter_mut().for_each(|x| *x = 0.0);
        let start = l * lambda;
        for (j, &vj) in condenser.v().iter().enumerate() {
            let i = start + j;
            for (k, &c) in binom.iter().enumerate() {
                if k > i {
                    break;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                row[i - k] += s * vj * sign * c;
            }
        }
        norms.push(norm1(&row));
    }
    Ok(norms)
}

/// Analytic bound on the condensed quantization error used as the `eta`
/// of the recovery program:
///
/// * Sigma-Delta: `(8r)^{r+1} lambda^{-r+1/2} delta`;
/// * beta scheme: `delta * beta^{-lambda+1}`.
pub fn eta_bound(flavor: Flavor, lambda: usize, delta: f64) -> Result<f64> {
    if lambda == 0 {
        return Err(invalid("lambda must be at least 1"));
    }
    let lam = lambda as f64;
    match flavor {
        Flavor::SigmaDelta { order, .. } => {
            let r = f64::from(order);
            Ok((8.0 * r).powf(r + 1.0) * lam.powf(-r + 0.5) * delta)
        }
        Flavor::Beta { beta } => Ok(delta * beta.powf(-lam + 1.0)),
        Flavor::Custom => Err(invalid("no analytic eta for a custom condensation vector")),
    }
}
