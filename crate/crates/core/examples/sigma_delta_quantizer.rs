//! Quantize a slowly varying signal with Sigma-Delta schemes of increasing
//! order and look at the state vector and the noise-shaping relation.
//!
//! ```bash
//! cargo run --release --example sigma_delta_quantizer
//! ```

use nsq::quantize::{relation_residual, Alphabet, NoiseShaper, Scheme};

fn main() -> nsq::Result<()> {
    let m = 512;
    let y: Vec<f64> = (0..m).map(|i| 0.8 * (i as f64 / 40.0).sin()).collect();

    for (order, levels) in [(1, 1), (2, 2), (3, 4)] {
        let scheme = Scheme::sigma_delta(order)?;
        let alphabet = Alphabet::new(levels, 1.0)?;
        let shaper = NoiseShaper::new(scheme.clone(), alphabet);
        let code = shaper.quantize(&y)?;

        // a moving average of the code tracks the input
        let w = 16;
        let avg_err = (w..m)
            .map(|i| {
                let q: f64 = code.q[i - w..i].iter().sum::<f64>() / w as f64;
                let s: f64 = y[i - w..i].iter().sum::<f64>() / w as f64;
                (q - s).abs()
            })
            .fold(0.0, f64::max);

        println!(
            "order {order}, {} levels: max |u| = {:.3}, margin = {:+.3}, |y - q - Hu| = {:.1e}, windowed error = {:.3}",
            alphabet.len(),
            code.max_state,
            shaper.stability_margin(code.mu),
            relation_residual(&y, &code, &scheme)?,
            avg_err
        );
    }
    Ok(())
}
