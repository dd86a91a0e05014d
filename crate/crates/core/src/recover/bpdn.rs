//! Basis pursuit denoising, `min ||z||_1  s.t.  ||A z - b||_2 <= eta`,
//! solved by a primal-dual hybrid gradient iteration with adaptive step
//! balancing. Only `A` and `A^T` products are needed.

use crate::error::{check_len, invalid, Result};
use crate::linalg::{norm1, norm2, sub};
use crate::operator::{estimate_norm, LinearOperator};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams {
    /// Relative tolerance on the primal/dual residuals and the constraint.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Initial ratio `tau / sigma` between the primal and dual steps.
    pub step_ratio: f64,
    /// Rebalance the two steps from the residuals as the iteration runs.
    pub adaptive: bool,
    /// Power-method iterations for the `||A||` estimate.
    pub norm_iterations: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 20_000,
            step_ratio: 1.0,
            adaptive: true,
            norm_iterations: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpdnSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `||A x - b||_2`.
    pub residual_norm: f64,
    /// `||x||_1`.
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Projection of `w` onto the dual feasible set: the prox of the conjugate
/// of the indicator of the ball `{ ||z - b|| <= eta }`.
fn dual_prox(w: &mut [f64], b: &[f64], sigma: f64, eta: f64) {
    for (wi, bi) in w.iter_mut().zip(b) {
        *wi -= sigma * bi;
    }
    let nw = norm2(w);
    let t = sigma * eta;
    let factor = if nw <= t { 0.0 } else { 1.0 - t / nw };
    for wi in w.iter_mut() {
        *wi *= factor;
    }
}

/// Approximately solves `min ||z||_1` subject to `||A z - b||_2 <= eta`.
///
/// Stops once the primal and dual residuals fall below
/// `tolerance * max(1, ||b||)` and the constraint is met to the same slack.
/// A run that hits `max_iterations` returns its last iterate with
/// `converged == false`.
pub fn bpdn_solve(
    op: &dyn LinearOperator,
    b: &[f64],
    eta: f64,
    params: &SolverParams,
) -> Result<BpdnSolution> {
    check_len("bpdn right-hand side", op.nrows(), b.len())?;
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(invalid(format!("eta must be finite and >= 0, got {eta}")));
    }
    if !(params.tolerance > 0.0 && params.step_ratio > 0.0) {
        return Err(invalid("solver tolerance and step ratio must be positive"));
    }
    let n = op.ncols();
    let b_norm = norm2(b);
    let slack = params.tolerance * b_norm.max(1.0);

    // Zero is optimal whenever it is feasible.
    if b_norm <= eta {
        return Ok(BpdnSolution {
            x: vec![0.0; n],
            iterations: 0,
            converged: true,
            residual_norm: b_norm,
            objective: 0.0,
            primal_residual: 0.0,
            dual_residual: 0.0,
        });
    }

    let op_norm = estimate_norm(op, params.norm_iterations, 0x5eed)?.max(f64::MIN_POSITIVE);
    // Power iteration underestimates; pad it so tau * sigma * ||A||^2 < 1.
    let l = op_norm * 1.01;
    let mut tau = params.step_ratio.sqrt() / l;
    let mut sigma = 1.0 / (params.step_ratio.sqrt() * l);
    let mut adapt_rate = 0.5;
    const ADAPT_DECAY: f64 = 0.95;
    const BALANCE: f64 = 1.5;

    let mut x = vec![0.0; n];
    let mut y = vec![0.0; b.len()];
    let mut aty = vec![0.0; n];
    let mut ax = vec![0.0; b.len()];

    let mut primal_res = f64::INFINITY;
    let mut dual_res = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=params.max_iterations {
        iterations = it;
        // Primal step.
        let x_new: Vec<f64> = x
            .iter()
            .zip(&aty)
            .map(|(xi, gi)| soft_threshold(xi - tau * gi, tau))
            .collect();
        let ax_new = op.apply(&x_new)?;
        // Dual step on the extrapolated point 2 x_new - x.
        let mut w: Vec<f64> = y
            .iter()
            .zip(ax_new.iter().zip(&ax))
            .map(|(yi, (an, ao))| yi + sigma * (2.0 * an - ao))
            .collect();
        dual_prox(&mut w, b, sigma, eta);
        let y_new = w;
        let aty_new = op.apply_adjoint(&y_new)?;

        // Residuals of the optimality conditions.
        let p: Vec<f64> = x
            .iter()
            .zip(&x_new)
            .zip(aty.iter().zip(&aty_new))
            .map(|((xo, xn), (go, gn))| (xo - xn) / tau - (go - gn))
            .collect();
        let d: Vec<f64> = y
            .iter()
            .zip(&y_new)
            .zip(ax.iter().zip(&ax_new))
            .map(|((yo, yn), (ao, an))| (yo - yn) / sigma - (ao - an))
            .collect();
        primal_res = norm2(&p);
        dual_res = norm2(&d);

        x = x_new;
        y = y_new;
        aty = aty_new;
        ax = ax_new;

        let feasibility = norm2(&sub(&ax, b));
        if primal_res <= slack && dual_res <= slack && feasibility <= eta + slack {
            converged = true;
            break;
        }

        if params.adaptive {
            if primal_res > BALANCE * dual_res {
                tau /= 1.0 - adapt_rate;
                sigma *= 1.0 - adapt_rate;
                adapt_rate *= ADAPT_DECAY;
            } else if dual_res > BALANCE * primal_res {
                tau *= 1.0 - adapt_rate;
                sigma /= 1.0 - adapt_rate;
                adapt_rate *= ADAPT_DECAY;
            }
        }
    }

    Ok(BpdnSolution {
        residual_norm: norm2(&sub(&ax, b)),
        objective: norm1(&x),
        x,
        iterations,
        converged,
        primal_residual: primal_res,
        dual_residual: dual_res,
    })
}
