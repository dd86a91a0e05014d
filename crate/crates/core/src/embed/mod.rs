//! Fast binary embeddings.
//!
//! A point `x` is mapped to `f(x) = Q(s * Phi * D_eps * x)` where `Q` is a
//! noise-shaping quantizer, `D_eps` a random column sign flip and `s = 8/9`.
//! Distances between codes are measured with the condensed pseudo-metric
//! `d(q, q') = ||V~ (q - q')||_2`.

mod codec;
mod report;

pub use codec::{
    decode_codes, encode_code, read_codes, write_codes, CodeHeader, CodeRecord, SchemeTag, HEADER_LEN,
    MAGIC,
};
pub use report::{evaluate_embedding, fit_distortion, DistortionReport, DistortionSummary, PairRecord};

use rand::Rng;

use crate::condense::{eta_bound, Condenser, Scaling};
use crate::error::{check_len, invalid, Result};
use crate::linalg::{dot, norm1, norm2};
use crate::quantize::{Alphabet, NoiseShaper, QuantizedCode, Scheme, SchemeSpec};
use crate::rng::{derive_seed, gaussian_vec, rng_from_seed};
use crate::transforms::{EnsembleKind, SignVector, StructuredEnsemble};

/// Default factor applied before quantization.
pub const INPUT_SCALE: f64 = 8.0 / 9.0;

const COLUMN_SIGN_STREAM: u64 = 11;

/// Which ball the embedded points are assumed to live in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainMode {
    /// `||x||_1 <= 1`; the binary alphabet is stable as is.
    L1Ball,
    /// `||x||_2 <= 1`; the alphabet spacing is multiplied by
    /// `sqrt((1 + alpha) m)` to keep the quantizer stable.
    L2Ball { alpha: f64 },
}

/// `Q ∘ s Phi ∘ D_eps` together with the condenser defining code distances.
#[derive(Clone, Debug)]
pub struct EmbeddingPipeline {
    pub ensemble: StructuredEnsemble,
    pub column_signs: SignVector,
    pub shaper: NoiseShaper,
    /// Tilde-normalized.
    pub condenser: Condenser,
    pub input_scale: f64,
    pub domain: DomainMode,
}

impl EmbeddingPipeline {
    /// Assembles a pipeline. The condenser is switched to the tilde
    /// normalization; in [`DomainMode::L2Ball`] the shaper's alphabet is
    /// rescaled.
    pub fn new(
        ensemble: StructuredEnsemble,
        column_signs: SignVector,
        shaper: NoiseShaper,
        condenser: Condenser,
        domain: DomainMode,
    ) -> Result<Self> {
        check_len("embedding column signs", ensemble.n(), column_signs.len())?;
        check_len("embedding condenser", ensemble.m(), condenser.m())?;
        if let Some(block) = shaper.scheme.block_len() {
            if block != condenser.lambda() {
                return Err(invalid("beta block length must equal the condensation block"));
            }
        }
        let shaper = match domain {
            DomainMode::L1Ball => shaper,
            DomainMode::L2Ball { alpha } => {
                if !(alpha.is_finite() && alpha >= 0.0) {
                    return Err(invalid("alpha must be non-negative"));
                }
                let factor = ((1.0 + alpha) * ensemble.m() as f64).sqrt();
                let a = shaper.alphabet;
                NoiseShaper::new(shaper.scheme, Alphabet::new(a.levels_per_side(), a.delta() * factor)?)
            }
        };
        Ok(Self {
            ensemble,
            column_signs,
            shaper,
            condenser: condenser.with_scaling(Scaling::Tilde),
            input_scale: INPUT_SCALE,
            domain,
        })
    }

    /// Binary pipeline with the beta scheme: `m = p * lambda` measurements
    /// from an ensemble of `kind`, everything derived from `seed`.
    pub fn beta(kind: EnsembleKind, n: usize, p: usize, lambda: usize, beta: f64, seed: u64) -> Result<Self> {
        let ensemble = StructuredEnsemble::sample(kind, n, p * lambda, seed)?;
        let signs = SignVector::random(n, derive_seed(seed, COLUMN_SIGN_STREAM));
        let shaper = NoiseShaper::new(Scheme::beta(beta, lambda)?, Alphabet::binary());
        let condenser = Condenser::beta(beta, lambda, p, Scaling::Tilde)?;
        Self::new(ensemble, signs, shaper, condenser, DomainMode::L1Ball)
    }

    /// Binary pipeline with `r`-th order Sigma-Delta; `lambda` must be of the
    /// form `r * k - r + 1`.
    pub fn sigma_delta(kind: EnsembleKind, n: usize, p: usize, lambda: usize, order: u32, seed: u64) -> Result<Self> {
        let ensemble = StructuredEnsemble::sample(kind, n, p * lambda, seed)?;
        let signs = SignVector::random(n, derive_seed(seed, COLUMN_SIGN_STREAM));
        let shaper = NoiseShaper::new(Scheme::sigma_delta(order)?, Alphabet::binary());
        let condenser = Condenser::sigma_delta_for_lambda(order, lambda, p, Scaling::Tilde)?;
        Self::new(ensemble, signs, shaper, condenser, DomainMode::L1Ball)
    }

    pub fn with_input_scale(mut self, scale: f64) -> Self {
        self.input_scale = scale;
        self
    }

    pub fn n(&self) -> usize {
        self.ensemble.n()
    }

    pub fn m(&self) -> usize {
        self.ensemble.m()
    }

    /// `s * Phi * D_eps * x`, the vector that gets quantized.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let y = self.ensemble.apply(&self.column_signs.apply(x)?)?;
        Ok(y.into_iter().map(|v| v * self.input_scale).collect())
    }

    /// `f(x)` with its state vector. A point outside the domain ball is
    /// still embedded; the returned code may then carry a stability warning.
    pub fn embed_point(&self, x: &[f64]) -> Result<QuantizedCode> {
        self.shaper.quantize(&self.project(x)?)
    }

    /// Whether `x` lies in the unit ball of the pipeline's domain.
    pub fn in_domain(&self, x: &[f64]) -> bool {
        match self.domain {
            DomainMode::L1Ball => norm1(x) <= 1.0,
            DomainMode::L2Ball { .. } => norm2(x) <= 1.0,
        }
    }

    /// `d(q1, q2) = ||V~ (q1 - q2)||_2`.
    pub fn code_distance(&self, q1: &[f64], q2: &[f64]) -> Result<f64> {
        self.condenser.pseudo_metric(q1, q2)
    }

    /// `||V~ (y - q)||_2` for the projected point `y`.
    pub fn condensed_error(&self, x: &[f64], code: &QuantizedCode) -> Result<f64> {
        self.condenser.pseudo_metric(&self.project(x)?, &code.q)
    }

    /// Analytic bound on [`EmbeddingPipeline::condensed_error`]:
    /// `9/8` times the recovery bound for the same condenser.
    pub fn error_bound(&self) -> Result<f64> {
        Ok(9.0 / 8.0
            * eta_bound(
                self.condenser.flavor(),
                self.condenser.lambda(),
                self.shaper.alphabet.delta(),
            )?)
    }
}

/// Monte Carlo estimate of the Gaussian mean width of a finite set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianWidth {
    /// Mean of `max_{v in T} <v, g>` over the samples.
    pub width: f64,
    /// Standard error of that mean.
    pub std_error: f64,
    /// `max_{v in T} ||v||_2`.
    pub radius: f64,
}

pub fn gaussian_width_mc(points: &[Vec<f64>], samples: usize, seed: u64) -> Result<GaussianWidth> {
    let Some(first) = points.first() else {
        return Err(invalid("gaussian width of an empty set"));
    };
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let n = first.len();
    if let Some(bad) = points.iter().find(|v| v.len() != n) {
        check_len("gaussian width", n, bad.len())?;
    }
    let mut rng = rng_from_seed(seed);
    let sups: Vec<f64> = (0..samples)
        .map(|_| {
            let g = gaussian_vec(&mut rng, n);
            points.iter().map(|v| dot(v, &g)).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let k = samples as f64;
    let mean = sups.iter().sum::<f64>() / k;
    let var = if samples > 1 {
        sups.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(GaussianWidth {
        width: mean,
        std_error: (var / k).sqrt(),
        radius: points.iter().map(|v| norm2(v)).fold(0.0, f64::max),
    })
}

/// Number of blocks `p` balancing distortion against quantization error:
/// the divisor of `m` closest to `m / ceil(ln^2 m)` for Sigma-Delta and to
/// `m / ceil(ln m)` for the beta scheme. Ties go to the smaller divisor.
pub fn recommended_p(m: usize, scheme: SchemeSpec) -> Result<usize> {
    if m < 4 {
        return Err(invalid(format!("m = {m} is too small to condense")));
    }
    let ln = (m as f64).ln();
    let target = match scheme {
        SchemeSpec::SigmaDelta { .. } => m as f64 / (ln * ln).ceil(),
        SchemeSpec::Beta { .. } => m as f64 / ln.ceil(),
        SchemeSpec::Msq => return Err(invalid("memoryless quantization has no block structure")),
    };
    let best = (1..=m)
        .filter(|d| m % d == 0)
        .min_by(|a, b| {
            let da = (*a as f64 - target).abs();
            let db = (*b as f64 - target).abs();
            da.total_cmp(&db)
        })
        .unwrap();
    Ok(best)
}

/// A point drawn uniformly from the `l1` sphere scaled by `radius`, i.e. a
/// Laplace vector normalized in `l1`.
pub fn random_l1_point<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n)
        .map(|_| {
            let e: f64 = -(1.0 - rng.random::<f64>()).ln();
            if rng.random::<bool>() {
                e
            } else {
                -e
            }
        })
        .collect();
    let s = norm1(&x);
    x.iter_mut().for_each(|v| *v *= radius / s);
    x
}
