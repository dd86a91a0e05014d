use rayon::prelude::*;

use super::EmbeddingPipeline;
use crate::error::{invalid, Result};
use crate::linalg::{norm2, sub};

/// Distances for one pair of points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    /// `||x_i - x_j||_2`.
    pub true_distance: f64,
    /// `d(f(x_i), f(x_j))`.
    pub embedded_distance: f64,
    /// `||V~ s Phi D (x_i - x_j)||_2`, the same map without quantization.
    pub control_distance: f64,
    /// `|control - true| / true`, the part of the error the linear map
    /// alone already makes (zero when `true_distance` is zero).
    pub multiplicative_residual: f64,
    /// `|embedded - control|`, the part caused by quantization.
    pub additive_residual: f64,
}

impl PairRecord {
    /// `|embedded - true|`.
    pub fn error(&self) -> f64 {
        (self.embedded_distance - self.true_distance).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionSummary {
    /// Slope of the non-negative least-squares fit `error ≈ alpha d + eta`.
    pub alpha_hat: f64,
    /// Intercept of that fit.
    pub eta_lsq: f64,
    /// Smallest `eta` such that `error <= alpha_hat d + eta` for every pair.
    pub eta_hat: f64,
    /// `max(error - alpha_hat d - eta_lsq, 0)`.
    pub max_violation: f64,
    /// `max(error - alpha d, 0)` for the caller's `alpha`.
    pub max_excess_at_alpha: f64,
    pub median_additive_residual: f64,
    pub max_additive_residual: f64,
    pub max_multiplicative_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistortionReport {
    pub alpha: f64,
    pub pairs: Vec<PairRecord>,
    pub summary: DistortionSummary,
    /// Number of embedded codes that carried a stability warning.
    pub unstable_points: usize,
}

/// Embeds all points and compares code distances with Euclidean ones over
/// every pair. `alpha` is the multiplicative distortion the caller is
/// willing to grant; it only affects
/// [`DistortionSummary::max_excess_at_alpha`].
pub fn evaluate_embedding(points: &[Vec<f64>], pl: &EmbeddingPipeline, alpha: f64) -> Result<DistortionReport> {
    if points.len() < 2 {
        return Err(invalid("need at least two points"));
    }
    let embedded = points
        .par_iter()
        .map(|x| Ok((pl.project(x)?, pl.embed_point(x)?)))
        .collect::<Result<Vec<_>>>()?;
    let unstable_points = embedded.iter().filter(|(_, c)| c.warning.is_some()).count();

    let mut pairs = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = norm2(&sub(&points[i], &points[j]));
            let emb = pl.code_distance(&embedded[i].1.q, &embedded[j].1.q)?;
            let ctrl = pl.condenser.pseudo_metric(&embedded[i].0, &embedded[j].0)?;
            pairs.push(PairRecord {
                i,
                j,
                true_distance: d,
                embedded_distance: emb,
                control_distance: ctrl,
                multiplicative_residual: if d > 0.0 { (ctrl - d).abs() / d } else { 0.0 },
                additive_residual: (emb - ctrl).abs(),
            });
        }
    }
    let summary = summarize(&pairs, alpha);
    Ok(DistortionReport {
        alpha,
        pairs,
        summary,
        unstable_points,
    })
}

fn summarize(pairs: &[PairRecord], alpha: f64) -> DistortionSummary {
    let d: Vec<f64> = pairs.iter().map(|p| p.true_distance).collect();
    let e: Vec<f64> = pairs.iter().map(PairRecord::error).collect();
    let (alpha_hat, eta_lsq) = fit_distortion(&d, &e);
    let slack = |a: f64, b: f64| {
        d.iter()
            .zip(&e)
            .map(|(di, ei)| ei - a * di - b)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut additive: Vec<f64> = pairs.iter().map(|p| p.additive_residual).collect();
    additive.sort_by(f64::total_cmp);
    DistortionSummary {
        alpha_hat,
        eta_lsq,
        eta_hat: slack(alpha_hat, 0.0).max(0.0),
        max_violation: slack(alpha_hat, eta_lsq).max(0.0),
        max_excess_at_alpha: slack(alpha, 0.0).max(0.0),
        median_additive_residual: median_sorted(&additive),
        max_additive_residual: additive.last().copied().unwrap_or(0.0),
        max_multiplicative_residual: pairs
            .iter()
            .map(|p| p.multiplicative_residual)
            .fold(0.0, f64::max),
    }
}

fn median_sorted(v: &[f64]) -> f64 {
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Least squares `e ≈ a d + b` subject to `a, b >= 0`.
pub fn fit_distortion(d: &[f64], e: &[f64]) -> (f64, f64) {
    let n = d.len() as f64;
    if d.is_empty() {
        return (0.0, 0.0);
    }
    let sd: f64 = d.iter().sum();
    let se: f64 = e.iter().sum();
    let sdd: f64 = d.iter().map(|x| x * x).sum();
    let sde: f64 = d.iter().zip(e).map(|(x, y)| x * y).sum();
    let cost = |a: f64, b: f64| -> f64 { d.iter().zip(e).map(|(x, y)| (y - a * x - b).powi(2)).sum() };

    let det = n * sdd - sd * sd;
    let mut candidates = vec![(0.0, 0.0)];
    if det.abs() > 1e-300 {
        let a = (n * sde - sd * se) / det;
        let b = (sdd * se - sd * sde) / det;
        if a >= 0.0 && b >= 0.0 {
            candidates.push((a, b));
        }
    }
    if sdd > 0.0 {
        candidates.push(((sde / sdd).max(0.0), 0.0));
    }
    candidates.push((0.0, (se / n).max(0.0)));
    candidates
        .into_iter()
        .min_by(|x, y| cost(x.0, x.1).total_cmp(&cost(y.0, y.1)))
        .unwrap()
}
