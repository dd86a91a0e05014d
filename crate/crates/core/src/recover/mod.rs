//! Quantized compressed sensing: quantize `Phi x` with a noise-shaping
//! scheme, then decode by `l1` minimization under the condensed constraint
//! `||V^ Phi z - V^ q||_2 <= eta`.

mod bpdn;
mod signal;

pub use bpdn::{bpdn_solve, BpdnSolution, SolverParams};
pub use signal::{generate_sparse_signal, SparseSignal, MEASUREMENT_BOUND};

use crate::condense::{eta_bound, Condenser, Flavor, Scaling};
use crate::error::{check_len, invalid, Result};
use crate::linalg::{norm2, sub};
use crate::operator::CondensedOperator;
use crate::quantize::{NoiseShaper, QuantizedCode};
use crate::transforms::StructuredEnsemble;

/// Analytic `eta` for the recovery constraint; see [`eta_bound`].
pub fn choose_eta(flavor: Flavor, lambda: usize, delta: f64) -> Result<f64> {
    eta_bound(flavor, lambda, delta)
}

/// The realized condensed quantization error `||V^ (Phi x - q)||_2`.
/// Needs the true signal, so it is only available in experiments.
pub fn oracle_eta(
    ensemble: &StructuredEnsemble,
    condenser: &Condenser,
    x: &[f64],
    code: &QuantizedCode,
) -> Result<f64> {
    let y = ensemble.apply(x)?;
    check_len("oracle eta", y.len(), code.len())?;
    Ok(norm2(&condenser.condense(&sub(&y, &code.q))?))
}

/// How the recovery program picks its `eta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EtaMode {
    /// The analytic bound.
    Analytic,
    /// The realized error for the known signal.
    Oracle,
    Fixed(f64),
}

/// One instance of the decoding program.
#[derive(Clone, Debug)]
pub struct RecoveryProblem<'a> {
    pub ensemble: &'a StructuredEnsemble,
    /// Must use [`Scaling::Hat`].
    pub condenser: &'a Condenser,
    pub code: &'a QuantizedCode,
    pub eta: f64,
    pub params: SolverParams,
}

impl RecoveryProblem<'_> {
    pub fn reconstruct(&self) -> Result<BpdnSolution> {
        reconstruct(self)
    }
}

/// Solves `min ||z||_1  s.t.  ||V^ Phi z - V^ q||_2 <= eta`.
pub fn reconstruct(problem: &RecoveryProblem<'_>) -> Result<BpdnSolution> {
    if problem.condenser.scaling() != Scaling::Hat {
        return Err(invalid("recovery uses the hat-normalized condenser"));
    }
    let op = CondensedOperator::new(problem.ensemble, problem.condenser)?;
    let b = problem.condenser.condense(&problem.code.q)?;
    bpdn_solve(&op, &b, problem.eta, &problem.params)
}

/// Measurement, quantization and decoding bundled together.
#[derive(Clone, Debug)]
pub struct SensingPipeline {
    pub ensemble: StructuredEnsemble,
    pub shaper: NoiseShaper,
    pub condenser: Condenser,
}

/// Result of [`SensingPipeline::sense_and_recover`].
#[derive(Clone, Debug)]
pub struct RecoveryOutcome {
    pub code: QuantizedCode,
    pub eta: f64,
    pub solution: BpdnSolution,
    /// `||x^ - x||_2`.
    pub error: f64,
}

impl SensingPipeline {
    pub fn new(ensemble: StructuredEnsemble, shaper: NoiseShaper, condenser: Condenser) -> Result<Self> {
        check_len("sensing pipeline", ensemble.m(), condenser.m())?;
        if let Some(block) = shaper.scheme.block_len() {
            if block != condenser.lambda() {
                return Err(invalid("beta block length must equal the condensation block"));
            }
        }
        Ok(Self {
            ensemble,
            shaper,
            condenser: condenser.with_scaling(Scaling::Hat),
        })
    }

    pub fn measure(&self, x: &[f64]) -> Result<QuantizedCode> {
        self.shaper.quantize(&self.ensemble.apply(x)?)
    }

    pub fn eta(&self, mode: EtaMode, x: &[f64], code: &QuantizedCode) -> Result<f64> {
        match mode {
            EtaMode::Analytic => choose_eta(
                self.condenser.flavor(),
                self.condenser.lambda(),
                self.shaper.alphabet.delta(),
            ),
            EtaMode::Oracle => oracle_eta(&self.ensemble, &self.condenser, x, code),
            EtaMode::Fixed(eta) => Ok(eta),
        }
    }

    pub fn recover(&self, code: &QuantizedCode, eta: f64, params: SolverParams) -> Result<BpdnSolution> {
        RecoveryProblem {
            ensemble: &self.ensemble,
            condenser: &self.condenser,
            code,
            eta,
            params,
        }
        .reconstruct()
    }

    /// Runs the whole pipeline on a known signal.
    pub fn sense_and_recover(&self, x: &[f64], mode: EtaMode, params: SolverParams) -> Result<RecoveryOutcome> {
        let code = self.measure(x)?;
        let eta = self.eta(mode, x, &code)?;
        let solution = self.recover(&code, eta, params)?;
        let error = norm2(&sub(&solution.x, x));
        Ok(RecoveryOutcome {
            code,
            eta,
            solution,
            error,
        })
    }
}
