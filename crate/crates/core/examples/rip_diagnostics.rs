//! Estimate restricted isometry constants of the condensed operator, compare
//! the sampled lower estimate with exact enumeration, and run the multiscale
//! check.
//!
//! ```bash
//! cargo run --release --example rip_diagnostics
//! ```

use nsq::condense::{Condenser, Scaling};
use nsq::diagnostics::{estimate_rip, exact_rip_small, mrip_check};
use nsq::transforms::{EnsembleKind, StructuredEnsemble};

fn main() -> nsq::Result<()> {
    let n = 64;
    let lambda = 4;
    println!("  p   sampled delta_3");
    for p in [4, 8, 16, 32] {
        let e = StructuredEnsemble::sample(EnsembleKind::Hadamard, n, p * lambda, 1)?;
        let c = Condenser::from_vector(vec![1.0; lambda], p, Scaling::Hat)?;
        println!("{p:>3}   {:.3}", estimate_rip(&e, &c, 3, 10_000, 2)?.delta);
    }

    let e = StructuredEnsemble::sample(EnsembleKind::PartialCirculant, 16, 16, 4)?;
    let c = Condenser::from_vector(vec![1.0; 4], 4, Scaling::Hat)?;
    let sampled = estimate_rip(&e, &c, 2, 20_000, 5)?;
    let exact = exact_rip_small(&e, &c, 2)?;
    println!("\nn = 16: sampled {:.4} <= exact {:.4} ({} supports)", sampled.delta, exact.delta, exact.trials);

    let e = StructuredEnsemble::sample(EnsembleKind::Hadamard, 32, 32, 6)?;
    let c = Condenser::from_vector(vec![1.0; 2], 16, Scaling::Hat)?;
    let report = mrip_check(&e, &c, 1, 1.0, 2000, 7)?;
    println!("\nlevel   k   threshold   estimate");
    for l in &report.levels {
        println!("{:>5} {:>3} {:>11.3} {:>10.3}{}", l.level, l.k, l.threshold, l.estimate.delta, if l.pass { "" } else { "  fail" });
    }
    Ok(())
}
