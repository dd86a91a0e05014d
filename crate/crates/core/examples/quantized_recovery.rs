//! Recover a sparse signal from one-bit noise-shaped measurements by
//! condensing the code and solving basis pursuit denoising.
//!
//! ```bash
//! cargo run --release --example quantized_recovery
//! ```

use nsq::condense::{Condenser, Scaling};
use nsq::quantize::{Alphabet, NoiseShaper, Scheme};
use nsq::recover::{generate_sparse_signal, EtaMode, SensingPipeline, SolverParams};
use nsq::transforms::{EnsembleKind, StructuredEnsemble};

fn main() -> nsq::Result<()> {
    let (n, p, k) = (512, 64, 5);
    let beta = 10.0 / 9.0;
    for lambda in [2, 4, 8, 16] {
        let m = p * lambda;
        let ensemble = StructuredEnsemble::sample(EnsembleKind::Hadamard, n, m, 3)?;
        let x = generate_sparse_signal(n, k, 17, &ensemble)?.to_dense();
        let shaper = NoiseShaper::new(Scheme::beta(beta, lambda)?, Alphabet::binary());
        let condenser = Condenser::beta(beta, lambda, p, Scaling::Hat)?;
        let pipeline = SensingPipeline::new(ensemble, shaper, condenser)?;

        let out = pipeline.sense_and_recover(&x, EtaMode::Oracle, SolverParams::default())?;
        println!(
            "lambda {lambda:>2} ({m:>4} bits): ||x^ - x|| = {:.3e}, eta = {:.2e}, {} iterations",
            out.error, out.eta, out.solution.iterations
        );
    }
    Ok(())
}
