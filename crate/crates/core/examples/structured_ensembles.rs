//! Sample the three structured ensembles, apply them fast and compare with
//! their dense matrices.
//!
//! ```bash
//! cargo run --release --example structured_ensembles
//! ```

use nsq::linalg::{dot, norm2, sub};
use nsq::rng::{gaussian_vec, rng_from_seed};
use nsq::transforms::{EnsembleKind, StructuredEnsemble};

fn main() -> nsq::Result<()> {
    let (n, m) = (256, 64);
    let x = gaussian_vec(&mut rng_from_seed(1), n);
    let y = gaussian_vec(&mut rng_from_seed(2), m);

    for kind in [EnsembleKind::Hadamard, EnsembleKind::RealDft, EnsembleKind::PartialCirculant] {
        let e = StructuredEnsemble::sample(kind, n, m, 42)?;
        let fast = e.apply(&x)?;
        let dense = e.to_dense().matvec(&x);
        let adjoint_gap = (dot(&fast, &y) - dot(&x, &e.apply_adjoint(&y)?)).abs();
        println!(
            "{:<18} ||Ax - A_dense x|| = {:.1e}   adjoint gap = {:.1e}   row energy = {}",
            kind.name(),
            norm2(&sub(&fast, &dense)),
            adjoint_gap,
            e.row_energy()
        );
    }
    Ok(())
}
