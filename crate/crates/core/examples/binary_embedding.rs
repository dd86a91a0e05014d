//! Embed points of the unit l1 ball into binary codes, measure how well code
//! distances track Euclidean ones, and round-trip the codes through the
//! packed file format.
//!
//! ```bash
//! cargo run --release --example binary_embedding
//! ```

use nsq::embed::{decode_codes, evaluate_embedding, random_l1_point, write_codes, CodeHeader, EmbeddingPipeline, SchemeTag};
use nsq::quantize::SchemeSpec;
use nsq::rng::rng_from_seed;
use nsq::transforms::EnsembleKind;

fn main() -> nsq::Result<()> {
    let (n, p, lambda) = (1024, 16, 32);
    let beta = 10.0 / 9.0;
    let pl = EmbeddingPipeline::beta(EnsembleKind::Hadamard, n, p, lambda, beta, 7)?;

    let mut rng = rng_from_seed(11);
    let points: Vec<Vec<f64>> = (0..24).map(|_| random_l1_point(&mut rng, n, 1.0)).collect();
    let report = evaluate_embedding(&points, &pl, 0.5)?;
    let s = report.summary;
    println!("{} bits per point, {} pairs", pl.m(), report.pairs.len());
    println!("fitted |d_code - d| <= {:.3} d + {:.2e}", s.alpha_hat, s.eta_hat);
    println!("quantization part: median {:.2e}, max {:.2e}", s.median_additive_residual, s.max_additive_residual);
    println!("analytic bound on the quantization part: {:.2e}", pl.error_bound()?);

    let codes: Vec<Vec<f64>> = points
        .iter()
        .map(|x| pl.embed_point(x).map(|c| c.q))
        .collect::<nsq::Result<_>>()?;
    let header = CodeHeader::new(pl.m(), lambda, p, SchemeTag::from(SchemeSpec::Beta { beta }))?;
    let mut bytes = Vec::new();
    write_codes(&mut bytes, header, &codes)?;
    let back = decode_codes(&bytes)?;
    let same = back.iter().zip(&codes).all(|(r, q)| r.signs == *q);
    println!("packed {} codes into {} bytes, round trip exact: {same}", codes.len(), bytes.len());
    Ok(())
}
