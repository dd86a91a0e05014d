//! Restricted isometry diagnostics for condensed measurement operators.
//!
//! All quantities are measured on `M = V^ Phi` divided by the ensemble's row
//! energy, so that `E ||M x||_2^2 = ||x||_2^2` for every ensemble kind.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index;

use crate::condense::{Condenser, Scaling};
use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::{norm2, DenseMatrix};
use crate::operator::{materialize, CondensedOperator, LinearOperator};
use crate::rng::{gaussian_vec, rng_from_seed};
use crate::transforms::StructuredEnsemble;

/// Largest number of supports [`exact_rip_small`] will enumerate.
pub const EXACT_RIP_BUDGET: u128 = 100_000;

/// Largest `m` for which [`expectation_identity_check`] enumerates signs.
pub const IDENTITY_MAX_M: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RipEstimate {
    pub k: usize,
    /// Number of sampled vectors, or supports enumerated when `exact`.
    pub trials: usize,
    pub delta: f64,
    pub exact: bool,
}

/// `|‖A x‖² / energy - ‖x‖²|` for one vector.
pub fn rip_deviation(op: &dyn LinearOperator, energy: f64, x: &[f64]) -> Result<f64> {
    let y = op.apply(x)?;
    let nx = norm2(x);
    Ok((norm2(&y).powi(2) / energy - nx * nx).abs())
}

/// Sampled restricted isometry constant of `V^ Phi`: the worst
/// `|‖V^ Phi x‖² - 1|` over `trials` random unit `k`-sparse vectors with
/// uniform support and Gaussian values. Always a lower bound of the true
/// constant.
pub fn estimate_rip(
    ensemble: &StructuredEnsemble,
    condenser: &Condenser,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<RipEstimate> {
    let hat = condenser.with_scaling(Scaling::Hat);
    let op = CondensedOperator::new(ensemble, &hat)?;
    estimate_rip_operator(&op, ensemble.row_energy(), k, trials, seed)
}

/// [`estimate_rip`] for any operator; `energy` divides `‖A x‖²`.
pub fn estimate_rip_operator(
    op: &dyn LinearOperator,
    energy: f64,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<RipEstimate> {
    let n = op.ncols();
    if k == 0 || k > n {
        return Err(invalid(format!("sparsity {k} must lie in 1..={n}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut x = vec![0.0; n];
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let support = index::sample(&mut rng, n, k);
        let values = gaussian_vec(&mut rng, k);
        let nv = norm2(&values);
        if nv == 0.0 {
            continue;
        }
        for (i, v) in support.iter().zip(&values) {
            x[i] = v / nv;
        }
        worst = worst.max(rip_deviation(op, energy, &x)?);
        for i in support.iter() {
            x[i] = 0.0;
        }
    }
    Ok(RipEstimate {
        k,
        trials,
        delta: worst,
        exact: false,
    })
}

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exact restricted isometry constant of `V^ Phi` by enumerating supports.
pub fn exact_rip_small(ensemble: &StructuredEnsemble, condenser: &Condenser, k: usize) -> Result<RipEstimate> {
    let hat = condenser.with_scaling(Scaling::Hat);
    let op = CondensedOperator::new(ensemble, &hat)?;
    exact_rip_matrix(&materialize(&op)?, ensemble.row_energy(), k)
}

/// `max_{|S| = k} ‖M_S^T M_S / energy - I‖_2`. By eigenvalue interlacing
/// this also covers every smaller support.
pub fn exact_rip_matrix(m: &DenseMatrix, energy: f64, k: usize) -> Result<RipEstimate> {
    let n = m.ncols();
    if k == 0 || k > n {
        return Err(invalid(format!("sparsity {k} must lie in 1..={n}")));
    }
    let count = binomial(n, k);
    if count > EXACT_RIP_BUDGET {
        return Err(Error::Budget(format!("C({n}, {k}) = {count} supports")));
    }
    let gram = gram(m, energy);
    let mut support: Vec<usize> = (0..k).collect();
    let mut worst: f64 = 0.0;
    let mut block = DMatrix::<f64>::zeros(k, k);
    loop {
        for (a, &i) in support.iter().enumerate() {
            for (b, &j) in support.iter().enumerate() {
                block[(a, b)] = gram[i * n + j] - if a == b { 1.0 } else { 0.0 };
            }
        }
        let eig = SymmetricEigen::new(block.clone());
        worst = worst.max(eig.eigenvalues.amax());
        if !next_combination(&mut support, n) {
            break;
        }
    }
    Ok(RipEstimate {
        k,
        trials: count as usize,
        delta: worst,
        exact: true,
    })
}

fn gram(m: &DenseMatrix, energy: f64) -> Vec<f64> {
    let n = m.ncols();
    let mut g = vec![0.0; n * n];
    for r in 0..m.nrows() {
        let row = m.row(r);
        for i in 0..n {
            if row[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                g[i * n + j] += row[i] * row[j] / energy;
            }
        }
    }
    g
}

/// Advances to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..k {
        c[j] = c[j - 1] + 1;
    }
    true
}

/// Both sides of `E_eps ‖V Phi_eps x‖² = sum_j v_j² ‖A_{Omega_j} x‖²` for one
/// `x`, where `Phi_eps` has rows `eps_j a_j` and
/// `Omega_j = {j, j + lambda, ..., j + (p - 1) lambda}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityCase {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub cases: Vec<IdentityCase>,
    pub max_relative_error: f64,
}

/// Checks the sign-averaging identity for `points` random Gaussian `x` plus
/// `x = 0`, averaging over all `2^m` sign patterns explicitly. The
/// ensemble's own row signs are ignored; `v` is used unscaled.
pub fn expectation_identity_check(
    ensemble: &StructuredEnsemble,
    v: &[f64],
    p: usize,
    points: usize,
    seed: u64,
) -> Result<IdentityReport> {
    let m = ensemble.m();
    if m > IDENTITY_MAX_M {
        return Err(Error::Budget(format!("m = {m} needs 2^{m} sign patterns")));
    }
    let lambda = v.len();
    check_len("expectation identity (m = p * lambda)", m, p * lambda)?;
    let mut rng = rng_from_seed(seed);
    let mut xs: Vec<Vec<f64>> = (0..points).map(|_| gaussian_vec(&mut rng, ensemble.n())).collect();
    xs.push(vec![0.0; ensemble.n()]);

    let signs = ensemble.row_signs();
    let mut cases = Vec::with_capacity(xs.len());
    for x in &xs {
        // <a_j, x> without the row signs
        let b: Vec<f64> = ensemble
            .apply(x)?
            .iter()
            .enumerate()
            .map(|(j, y)| y * signs.get(j))
            .collect();
        let mut total = 0.0;
        for pattern in 0u32..(1 << m) {
            for l in 0..p {
                let s: f64 = (0..lambda)
                    .map(|t| {
                        let j = l * lambda + t;
                        let e = if pattern >> j & 1 == 1 { -1.0 } else { 1.0 };
                        v[t] * e * b[j]
                    })
                    .sum();
                total += s * s;
            }
        }
        let lhs = total / f64::from(1u32 << m);
        let rhs: f64 = (0..lambda)
            .map(|t| v[t] * v[t] * (0..p).map(|l| b[l * lambda + t].powi(2)).sum::<f64>())
            .sum();
        let scale = lhs.abs().max(rhs.abs());
        let relative_error = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
        cases.push(IdentityCase { lhs, rhs, relative_error });
    }
    let max_relative_error = cases.iter().map(|c| c.relative_error).fold(0.0, f64::max);
    Ok(IdentityReport {
        cases,
        max_relative_error,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MripLevel {
    pub level: u32,
    pub k: usize,
    /// `2^{level/2} * base_alpha`.
    pub threshold: f64,
    pub estimate: RipEstimate,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MripReport {
    pub levels: Vec<MripLevel>,
    pub first_failure: Option<u32>,
}

impl MripReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Largest ambient dimension accepted by [`mrip_check`].
pub const MRIP_MAX_N: usize = 4096;

/// Multiresolution check: for `level = 0..=ceil(log2 n)`, the RIP constant
/// at sparsity `min(2^level base_k, n)` must not exceed
/// `2^{level/2} base_alpha`. Levels whose support count fits the exact
/// budget are computed exactly, the others with `trials` samples.
pub fn mrip_check(
    ensemble: &StructuredEnsemble,
    condenser: &Condenser,
    base_k: usize,
    base_alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<MripReport> {
    let n = ensemble.n();
    if n > MRIP_MAX_N {
        return Err(Error::Budget(format!("n = {n} exceeds {MRIP_MAX_N}")));
    }
    if base_k == 0 {
        return Err(invalid("base sparsity must be positive"));
    }
    let hat = condenser.with_scaling(Scaling::Hat);
    let op = CondensedOperator::new(ensemble, &hat)?;
    let dense = materialize(&op)?;
    let energy = ensemble.row_energy();
    let top = n.next_power_of_two().trailing_zeros();
    let mut levels = Vec::new();
    let mut first_failure = None;
    for level in 0..=top {
        let k = (base_k << level).min(n);
        let threshold = 2f64.powf(f64::from(level) / 2.0) * base_alpha;
        let estimate = if binomial(n, k) <= EXACT_RIP_BUDGET {
            exact_rip_matrix(&dense, energy, k)?
        } else {
            estimate_rip_operator(&dense, energy, k, trials, seed.wrapping_add(u64::from(level)))?
        };
        let pass = estimate.delta <= threshold;
        if !pass && first_failure.is_none() {
            first_failure = Some(level);
        }
        levels.push(MripLevel {
            level,
            k,
            threshold,
            estimate,
            pass,
        });
    }
    Ok(MripReport { levels, first_failure })
}
