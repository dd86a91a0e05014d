//! Run a small lambda sweep from a key-value config and write the CSV,
//! summary and gnuplot script to a temporary directory.
//!
//! ```bash
//! cargo run --release --example experiment_sweep
//! ```

use nsq::experiment::{run_experiment, ExperimentConfig};

fn main() -> nsq::Result<()> {
    let dir = std::env::temp_dir().join("nsq-experiment-sweep");
    std::fs::create_dir_all(&dir)?;
    let mut cfg = ExperimentConfig::from_kv_str(
        "kind = embed-decay
         ensemble = hadamard
         n = 256
         p = 8
         lambda_sweep = 4,8,16
         scheme = beta:1.1111111111111112, sd:1
         trials = 4
         points = 12
         seed = 3
         plot = true",
    )?;
    cfg.out = dir.join("embed.csv");

    let outcome = run_experiment(&cfg)?;
    print!("{}", std::fs::read_to_string(&outcome.summary)?);
    println!("csv: {}", outcome.csv.display());
    if let Some(plot) = outcome.plot {
        println!("plot: {}", plot.display());
    }
    Ok(())
}
