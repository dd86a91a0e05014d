//! Noise-shaping quantizers.
//!
//! Every quantizer here runs the same greedy recursion
//!
//! ```text
//! w_s = y_s + sum_{j >= 1} H~_{s, s-j} u_{s-j}
//! q_s = nearest level of the alphabet to w_s
//! u_s = w_s - q_s
//! ```
//!
//! which produces a code `q` and a state vector `u` with `y - q = H u` where
//! `H = I - H~`. When `||H~||_{inf->inf} + ||y||_inf / delta <= 2L` the state
//! stays bounded by `delta`.

mod alphabet;
mod scheme;

pub use alphabet::Alphabet;
pub use scheme::{Scheme, SchemeSpec};

use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::norm_inf;

/// A scheme paired with the alphabet it quantizes to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseShaper {
    pub scheme: Scheme,
    pub alphabet: Alphabet,
}

impl NoiseShaper {
    pub fn new(scheme: Scheme, alphabet: Alphabet) -> Self {
        Self { scheme, alphabet }
    }

    /// `2L - ||H~||_{inf->inf} - mu / delta`; non-negative means the state is
    /// certified to stay within `delta` for inputs bounded by `mu`.
    pub fn stability_margin(&self, mu: f64) -> f64 {
        stability_margin(&self.scheme, &self.alphabet, mu)
    }

    pub fn quantize(&self, y: &[f64]) -> Result<QuantizedCode> {
        quantize_noise_shaping(y, &self.scheme, &self.alphabet)
    }
}

/// Attached to a code whose input violated the stability precondition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityWarning {
    pub margin: f64,
}

/// Output of a noise-shaping quantizer.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedCode {
    /// Quantized values, each a level of the alphabet.
    pub q: Vec<f64>,
    /// State vector with `y - q = H u`.
    pub u: Vec<f64>,
    /// `||y||_inf` of the input that was quantized.
    pub mu: f64,
    /// `||u||_inf` actually reached.
    pub max_state: f64,
    pub warning: Option<StabilityWarning>,
}

impl QuantizedCode {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

/// `2L - ||H~||_{inf->inf} - mu / delta`.
pub fn stability_margin(scheme: &Scheme, alphabet: &Alphabet, mu: f64) -> f64 {
    alphabet.len() as f64 - scheme.feedback_norm() - mu / alphabet.delta()
}

/// Memoryless scalar quantization: round each entry to its nearest level.
pub fn quantize_msq(y: &[f64], alphabet: &Alphabet) -> Vec<f64> {
    y.iter().map(|&v| alphabet.nearest(v)).collect()
}

/// Runs the greedy noise-shaping recursion for `scheme`.
///
/// A violated stability precondition does not abort the run; the returned
/// code carries a [`StabilityWarning`] and the achieved `max_state`.
pub fn quantize_noise_shaping(
    y: &[f64],
    scheme: &Scheme,
    alphabet: &Alphabet,
) -> Result<QuantizedCode> {
    if let Some(block) = scheme.block_len() {
        if y.len() % block != 0 {
            return Err(Error::Dimension {
                context: "beta quantizer (length must be a multiple of the block length)",
                expected: y.len().div_ceil(block) * block,
                got: y.len(),
            });
        }
    }
    let taps = scheme.feedback_taps();
    let block = scheme.block_len();
    let mut q = Vec::with_capacity(y.len());
    let mut u: Vec<f64> = Vec::with_capacity(y.len());
    for (s, &ys) in y.iter().enumerate() {
        let pos = block.map_or(s, |b| s % b);
        let mut w = ys;
        for (j, c) in taps.iter().enumerate().take(pos) {
            w += c * u[s - j - 1];
        }
        let level = alphabet.nearest(w);
        q.push(level);
        u.push(w - level);
    }
    let mu = norm_inf(y);
    let margin = stability_margin(scheme, alphabet, mu);
    Ok(QuantizedCode {
        max_state: norm_inf(&u),
        q,
        u,
        mu,
        warning: (margin < 0.0).then_some(StabilityWarning { margin }),
    })
}

/// `r`-th order Sigma-Delta quantization (`H = D^r` over the full length).
pub fn quantize_sigma_delta(y: &[f64], order: u32, alphabet: &Alphabet) -> Result<QuantizedCode> {
    quantize_noise_shaping(y, &Scheme::sigma_delta(order)?, alphabet)
}

/// Distributed noise shaping with blocks of length `lambda`.
pub fn quantize_beta(
    y: &[f64],
    beta: f64,
    lambda: usize,
    alphabet: &Alphabet,
) -> Result<QuantizedCode> {
    quantize_noise_shaping(y, &Scheme::beta(beta, lambda)?, alphabet)
}

/// Largest entry of `y - q - H u`, computed from the banded structure of `H`.
pub fn relation_residual(y: &[f64], code: &QuantizedCode, scheme: &Scheme) -> Result<f64> {
    check_len("relation residual", y.len(), code.len())?;
    let hu = scheme.apply_transfer(&code.u);
    Ok(y.iter()
        .zip(&code.q)
        .zip(&hu)
        .fold(0.0, |m, ((y, q), h)| m.max((y - q - h).abs())))
}

/// State bound for the stable coarse Sigma-Delta family,
/// `C delta (ceil(pi^2 / acosh(2L - mu/delta)^2) * (e / pi) * r)^r`.
///
/// This is a reporting quantity only; the quantizer implemented in this
/// module is the greedy one. `constant` is not calibrated (use `1.0`).
pub fn coarse_sd_state_bound(
    order: u32,
    levels_per_side: u32,
    delta: f64,
    mu: f64,
    constant: f64,
) -> Result<f64> {
    if order == 0 {
        return Err(invalid("Sigma-Delta order must be at least 1"));
    }
    if !(delta > 0.0) || mu < 0.0 {
        return Err(invalid("need delta > 0 and mu >= 0"));
    }
    let arg = 2.0 * f64::from(levels_per_side) - mu / delta;
    if arg <= 1.0 {
        return Err(Error::Domain(format!(
            "acosh argument 2L - mu/delta = {arg} must exceed 1"
        )));
    }
    let a = arg.acosh();
    let ceil = (std::f64::consts::PI.powi(2) / (a * a)).ceil();
    let base = ceil * std::f64::consts::E / std::f64::consts::PI * f64::from(order);
    Ok(constant * delta * base.powi(order as i32))
}
