use std::fs::{self, File};
use std::io::{self, BufWriter, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nsq::condense::Scaling;
use nsq::diagnostics::{estimate_rip, exact_rip_small, expectation_identity_check, mrip_check};
use nsq::embed::{evaluate_embedding, write_codes, CodeHeader};
use nsq::experiment::{
    condenser_for, embedding_pipeline, embedding_points, run_experiment, sensing_pipeline, shaper_for, EtaChoice,
    ExperimentConfig, SweepPoint,
};
use nsq::linalg::norm2;
use nsq::quantize::{relation_residual, SchemeSpec};
use nsq::recover::{generate_sparse_signal, EtaMode, SolverParams};
use nsq::transforms::{EnsembleKind, StructuredEnsemble};
use nsq::Error;

/// Noise-shaping quantization of structured random measurements.
#[derive(Parser)]
#[command(name = "nsq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed random points of the unit l1 ball and write their packed codes.
    Embed(EmbedArgs),
    /// Quantize whitespace-separated numbers from a file or stdin.
    Quantize(QuantizeArgs),
    /// Quantize a random sparse signal and reconstruct it.
    Recover(RecoverArgs),
    /// Estimate the restricted isometry constant of the condensed operator.
    Rip(RipArgs),
    /// Check the multiresolution restricted isometry profile.
    Mrip(MripArgs),
    /// Verify the sign-averaging identity by full enumeration.
    Identity(Common),
    /// Run a configured parameter sweep.
    Experiment(ExperimentArgs),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 8)]
    p: usize,
    /// `sd:r=<order>`, `beta:<value>` or `msq`.
    #[arg(long, default_value = "sd:r=1")]
    scheme: SchemeSpec,
    /// `boe-hadamard`, `boe-dft` or `pce`.
    #[arg(long, default_value = "boe-hadamard")]
    ensemble: EnsembleKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Common {
    fn point(&self) -> Result<SweepPoint, Error> {
        if self.p == 0 || self.m % self.p != 0 {
            return Err(Error::InvalidParameter(format!("p = {} does not divide m = {}", self.p, self.m)));
        }
        Ok(SweepPoint {
            scheme: self.scheme,
            p: self.p,
            lambda: self.m / self.p,
        })
    }

    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            n: self.n,
            m: Some(self.m),
            p: self.p,
            lambda_sweep: Vec::new(),
            schemes: vec![self.scheme],
            ensemble: self.ensemble,
            seed: self.seed,
            ..ExperimentConfig::default()
        }
    }

    fn ensemble(&self) -> Result<StructuredEnsemble, Error> {
        StructuredEnsemble::sample(self.ensemble, self.n, self.m, self.seed)
    }
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 32)]
    points: usize,
    /// Packed code file to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QuantizeArgs {
    #[arg(long, default_value = "sd:r=1")]
    scheme: SchemeSpec,
    /// Block length of the beta scheme.
    #[arg(long, default_value_t = 1)]
    lambda: usize,
    #[arg(long = "levels", default_value_t = 1)]
    levels: u32,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Input file; stdin when absent.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct RecoverArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value = "analytic")]
    eta: EtaChoice,
}

#[derive(Args)]
struct RipArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Sampled sparse vectors.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Also enumerate all supports.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct MripArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Key = value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    lambda_sweep: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    plot: bool,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let overrides = [
            ("kind", &self.kind),
            ("ensemble", &self.ensemble),
            ("n", &self.n),
            ("m", &self.m),
            ("p", &self.p),
            ("lambda_sweep", &self.lambda_sweep),
            ("k", &self.k),
            ("scheme", &self.scheme),
            ("levels", &self.levels),
            ("delta", &self.delta),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("points", &self.points),
            ("alpha", &self.alpha),
            ("eta", &self.eta),
            ("samples", &self.samples),
            ("out", &self.out),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.plot {
            cfg.plot = true;
        }
        Ok(cfg)
    }
}

enum Failure {
    Usage(Error),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = std::env::var("NSQ_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violated: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Embed(a) => embed(a),
        Command::Quantize(a) => quantize(a),
        Command::Recover(a) => recover(a),
        Command::Rip(a) => rip(a),
        Command::Mrip(a) => mrip(a),
        Command::Identity(a) => identity(a),
        Command::Experiment(a) => experiment(a),
    }
}

fn embed(a: EmbedArgs) -> Result<(), Failure> {
    let c = &a.common;
    let pt = c.point()?;
    let cfg = c.config();
    let pl = embedding_pipeline(&cfg, pt, c.seed)?;
    let points = embedding_points(c.n, a.points, c.seed ^ 0x5eed);
    let codes = points
        .iter()
        .map(|x| pl.embed_point(x).map(|code| code.q))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = &a.out {
        let header = CodeHeader::new(c.m, pt.lambda, c.p, c.scheme.into())?;
        write_codes(BufWriter::new(File::create(path).map_err(Error::from)?), header, &codes)?;
        println!("wrote {} codes to {}", codes.len(), path.display());
    }
    if points.len() >= 2 {
        let s = evaluate_embedding(&points, &pl, cfg.alpha)?.summary;
        println!("fitted alpha     {:.6}", s.alpha_hat);
        println!("fitted eta       {:.6}", s.eta_hat);
        println!("median additive  {:.6e}", s.median_additive_residual);
        println!("max additive     {:.6e}", s.max_additive_residual);
    }
    Ok(())
}

fn quantize(a: QuantizeArgs) -> Result<(), Failure> {
    let mut text = String::new();
    match &a.input {
        Some(path) => text = fs::read_to_string(path).map_err(Error::from)?,
        None => {
            io::stdin().read_to_string(&mut text).map_err(Error::from)?;
        }
    }
    let y = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::Format(format!("not a number: `{t}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let pt = SweepPoint {
        scheme: a.scheme,
        p: 1,
        lambda: a.lambda,
    };
    let alphabet = nsq::quantize::Alphabet::new(a.levels, a.delta)?;
    let shaper = shaper_for(pt, alphabet)?;
    let code = shaper.quantize(&y)?;
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    println!("q {}", join(&code.q));
    println!("u {}", join(&code.u));
    println!("max_state {}", code.max_state);
    println!("margin {}", shaper.stability_margin(code.mu));
    let residual = relation_residual(&y, &code, &shaper.scheme)?;
    if residual >= 1e-12 {
        return Err(Failure::Invariant(format!("y - q - Hu reaches {residual:e}")));
    }
    Ok(())
}

fn recover(a: RecoverArgs) -> Result<(), Failure> {
    let c = &a.common;
    let pt = c.point()?;
    let pl = sensing_pipeline(&c.config(), pt, c.seed)?;
    let x = generate_sparse_signal(c.n, a.k, c.seed ^ 0x5eed, &pl.ensemble)?.to_dense();
    let mode = match a.eta {
        EtaChoice::Analytic => EtaMode::Analytic,
        EtaChoice::Oracle => EtaMode::Oracle,
    };
    let out = pl.sense_and_recover(&x, mode, SolverParams::default())?;
    println!("eta         {:.6e}", out.eta);
    println!("error       {:.6e}", out.error);
    println!("relative    {:.6e}", out.error / norm2(&x));
    println!("iterations  {} (converged: {})", out.solution.iterations, out.solution.converged);
    Ok(())
}

fn rip(a: RipArgs) -> Result<(), Failure> {
    let c = &a.common;
    let condenser = condenser_for(c.point()?, Scaling::Hat)?;
    let e = c.ensemble()?;
    let sampled = estimate_rip(&e, &condenser, a.k, a.trials, c.seed)?;
    println!("sampled delta_{} = {:.6e} over {} vectors", a.k, sampled.delta, sampled.trials);
    if a.exact {
        let exact = exact_rip_small(&e, &condenser, a.k)?;
        println!("exact   delta_{} = {:.6e} over {} supports", a.k, exact.delta, exact.trials);
        if sampled.delta > exact.delta + 1e-9 {
            return Err(Failure::Invariant("sampled estimate exceeds the exact constant".into()));
        }
    }
    Ok(())
}

fn mrip(a: MripArgs) -> Result<(), Failure> {
    let c = &a.common;
    let condenser = condenser_for(c.point()?, Scaling::Hat)?;
    let report = mrip_check(&c.ensemble()?, &condenser, a.k, a.alpha, a.trials, c.seed)?;
    for l in &report.levels {
        println!(
            "level {:2}  k {:5}  delta {:.4e}  threshold {:.4e}  {}{}",
            l.level,
            l.k,
            l.estimate.delta,
            l.threshold,
            if l.pass { "pass" } else { "FAIL" },
            if l.estimate.exact { "" } else { " (sampled)" }
        );
    }
    match report.first_failure {
        None => println!("all levels pass"),
        Some(l) => println!("first failing level: {l}"),
    }
    Ok(())
}

fn identity(c: Common) -> Result<(), Failure> {
    let pt = c.point()?;
    let v = condenser_for(pt, Scaling::Raw)?.v().to_vec();
    let report = expectation_identity_check(&c.ensemble()?, &v, c.p, 10, c.seed)?;
    for case in &report.cases {
        println!("lhs {:.12e}  rhs {:.12e}  rel {:.2e}", case.lhs, case.rhs, case.relative_error);
    }
    if report.max_relative_error >= 1e-10 {
        return Err(Failure::Invariant(format!(
            "relative error {:e}",
            report.max_relative_error
        )));
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<(), Failure> {
    let cfg = a.resolve()?;
    let out = run_experiment(&cfg)?;
    print!("{}", fs::read_to_string(&out.summary).map_err(Error::from)?);
    println!("csv: {}", out.csv.display());
    if out.result.violations > 0 {
        return Err(Failure::Invariant(format!("{} violations", out.result.violations)));
    }
    Ok(())
}
