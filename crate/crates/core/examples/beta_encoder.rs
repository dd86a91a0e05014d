//! Distributed beta encoding: each block of `lambda` one-bit samples is a
//! base-beta expansion of the block, so `V H u` shrinks like `beta^-lambda`.
//!
//! ```bash
//! cargo run --release --example beta_encoder
//! ```

use nsq::condense::{eta_bound, Condenser, Flavor, Scaling};
use nsq::linalg::{norm2, sub};
use nsq::quantize::{Alphabet, NoiseShaper, Scheme};
use nsq::rng::rng_from_seed;
use rand::Rng;

fn main() -> nsq::Result<()> {
    let beta = 10.0 / 9.0;
    let p = 8;
    let mut rng = rng_from_seed(5);

    println!("lambda   ||V^(y - q)||   bound");
    for lambda in [4, 8, 16, 32, 64] {
        let m = p * lambda;
        let y: Vec<f64> = (0..m).map(|_| rng.random_range(-0.8..0.8)).collect();
        let shaper = NoiseShaper::new(Scheme::beta(beta, lambda)?, Alphabet::binary());
        let code = shaper.quantize(&y)?;

        let c = Condenser::beta(beta, lambda, p, Scaling::Hat)?;
        let err = norm2(&c.condense(&sub(&y, &code.q))?);
        let bound = eta_bound(Flavor::Beta { beta }, lambda, 1.0)?;
        println!("{lambda:>6}   {err:>13.3e}   {bound:.3e}");
    }
    Ok(())
}
