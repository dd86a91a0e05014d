//! Parameter sweeps over the embedding, recovery and diagnostic pipelines.
//!
//! An [`ExperimentConfig`] names one experiment and a sweep of
//! `(scheme, p, lambda)` points. Each point is repeated `trials` times with
//! seeds split from the master seed; trials run in parallel and are reduced
//! in trial order, so reruns are bit-identical. Results go to a CSV file, a
//! plain-text summary and optionally a gnuplot script.

mod config;

pub use config::{condenser_for, shaper_for, EtaChoice, ExperimentConfig, ExperimentKind, SweepPoint};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;

use crate::condense::Scaling;
use crate::diagnostics::{binomial, estimate_rip, exact_rip_small, expectation_identity_check, mrip_check, EXACT_RIP_BUDGET};
use crate::embed::{evaluate_embedding, random_l1_point, DomainMode, EmbeddingPipeline};
use crate::error::{invalid, Result};
use crate::linalg::{norm2, sub};
use crate::recover::{generate_sparse_signal, EtaMode, SensingPipeline, SolverParams};
use crate::rng::{derive_seed, rng_from_seed};
use crate::transforms::{SignVector, StructuredEnsemble};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Columns every CSV row starts with.
pub const PREFIX_COLUMNS: [&str; 10] = ["seed", "n", "m", "p", "lambda", "scheme", "r_or_beta", "L", "delta", "trials"];

/// Largest `n` for which `rip-estimate` also computes the exact constant.
const EXACT_RIP_MAX_N: usize = 256;

const IDENTITY_POINTS: usize = 10;
const IDENTITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(i) => i as f64,
            Value::Float(x) => x,
        }
    }

    fn render(self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format_float(x),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub point: SweepPoint,
    pub values: Vec<Value>,
}

impl ResultRow {
    /// Value of the metric column `name`.
    pub fn get(&self, columns: &[&str], name: &str) -> Option<f64> {
        columns.iter().position(|c| *c == name).map(|i| self.values[i].as_f64())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    /// Metric columns following [`PREFIX_COLUMNS`].
    pub columns: Vec<&'static str>,
    pub rows: Vec<ResultRow>,
    /// Number of broken invariants observed.
    pub violations: usize,
}

impl ExperimentResult {
    pub fn column(&self, name: &str) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.get(&self.columns, name)).collect()
    }
}

/// Files written by [`run_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutcome {
    pub result: ExperimentResult,
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Runs the experiment and writes its outputs next to `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let result = execute(cfg)?;
    let csv = cfg.out.clone();
    let summary = sibling(&cfg.out, "summary.txt");
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&csv, render_csv(cfg, &result))?;
    fs::write(&summary, render_summary(cfg, &result))?;
    let plot = if cfg.plot {
        let path = sibling(&cfg.out, "gp");
        fs::write(&path, render_gnuplot(&csv, &result))?;
        Some(path)
    } else {
        None
    };
    Ok(ExperimentOutcome {
        result,
        csv,
        summary,
        plot,
    })
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

/// Runs the experiment without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let points = cfg.sweep()?;
    let (columns, mut rows, mut violations) = (columns_for(cfg.kind), Vec::new(), 0);
    for pt in points {
        let (mut r, v) = match cfg.kind {
            ExperimentKind::EmbedDecay => embed_decay(cfg, pt)?,
            ExperimentKind::RecoverDecay => recover_decay(cfg, pt)?,
            ExperimentKind::RipEstimate => rip_estimate(cfg, pt)?,
            ExperimentKind::MripCheck => mrip_levels(cfg, pt)?,
            ExperimentKind::ExpectationIdentity => identity(cfg, pt)?,
        };
        rows.append(&mut r);
        violations += v;
    }
    Ok(ExperimentResult {
        kind: cfg.kind,
        columns,
        rows,
        violations,
    })
}

fn columns_for(kind: ExperimentKind) -> Vec<&'static str> {
    match kind {
        ExperimentKind::EmbedDecay => vec![
            "median_additive_residual",
            "max_additive_residual",
            "fitted_alpha",
            "fitted_eta",
            "max_excess_at_alpha",
            "median_jl_distortion",
            "error_bound",
            "unstable_points",
            "violations",
        ],
        ExperimentKind::RecoverDecay => vec![
            "median_error",
            "mean_error",
            "max_error",
            "median_eta",
            "median_realized_eta",
            "converged_fraction",
            "median_iterations",
            "violations",
        ],
        ExperimentKind::RipEstimate => vec!["k", "samples", "median_delta", "max_delta", "median_exact_delta", "violations"],
        ExperimentKind::MripCheck => vec!["level", "k", "threshold", "median_delta", "pass_fraction"],
        ExperimentKind::ExpectationIdentity => vec!["cases", "max_relative_error", "violations"],
    }
}

fn trial_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    derive_seed(cfg.seed, trial as u64 + 1)
}

fn run_trials<T: Send>(cfg: &ExperimentConfig, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| f(trial_seed(cfg, t)))
        .collect()
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// The points embedded in one trial: `count` points in the unit `l1` ball
/// with uniformly distributed radius.
pub fn embedding_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|_| {
            let r: f64 = rng.random();
            random_l1_point(&mut rng, n, r)
        })
        .collect()
}

/// The pipeline used by `embed-decay` for one trial.
pub fn embedding_pipeline(cfg: &ExperimentConfig, pt: SweepPoint, seed: u64) -> Result<EmbeddingPipeline> {
    let ensemble = StructuredEnsemble::sample(cfg.ensemble, cfg.n, pt.m(), derive_seed(seed, 0))?;
    let signs = SignVector::random(cfg.n, derive_seed(seed, 1));
    EmbeddingPipeline::new(
        ensemble,
        signs,
        shaper_for(pt, cfg.alphabet()?)?,
        condenser_for(pt, Scaling::Tilde)?,
        DomainMode::L1Ball,
    )
}

fn embed_decay(cfg: &ExperimentConfig, pt: SweepPoint) -> Result<(Vec<ResultRow>, usize)> {
    struct Trial {
        median_add: f64,
        max_add: f64,
        alpha_hat: f64,
        eta_hat: f64,
        excess: f64,
        jl: f64,
        unstable: usize,
        violations: usize,
    }
    let bound = embedding_pipeline(cfg, pt, 0)?.error_bound().ok();
    let trials = run_trials(cfg, |seed| {
        let pl = embedding_pipeline(cfg, pt, seed)?;
        let points = embedding_points(cfg.n, cfg.points, derive_seed(seed, 2));
        let report = evaluate_embedding(&points, &pl, cfg.alpha)?;
        let mut violations = 0;
        if let Some(b) = bound {
            for x in &points {
                let code = pl.embed_point(x)?;
                if code.warning.is_none() && pl.condensed_error(x, &code)? > b * (1.0 + 1e-12) {
                    violations += 1;
                }
            }
        }
        let jl: Vec<f64> = report.pairs.iter().map(|p| p.multiplicative_residual).collect();
        Ok(Trial {
            median_add: report.summary.median_additive_residual,
            max_add: report.summary.max_additive_residual,
            alpha_hat: report.summary.alpha_hat,
            eta_hat: report.summary.eta_hat,
            excess: report.summary.max_excess_at_alpha,
            jl: median(&jl),
            unstable: report.unstable_points,
            violations,
        })
    })?;
    let col = |f: fn(&Trial) -> f64| trials.iter().map(f).collect::<Vec<_>>();
    let violations = trials.iter().map(|t| t.violations).sum();
    let row = ResultRow {
        point: pt,
        values: vec![
            Value::Float(median(&col(|t| t.median_add))),
            Value::Float(max(&col(|t| t.max_add))),
            Value::Float(median(&col(|t| t.alpha_hat))),
            Value::Float(median(&col(|t| t.eta_hat))),
            Value::Float(max(&col(|t| t.excess))),
            Value::Float(median(&col(|t| t.jl))),
            Value::Float(bound.unwrap_or(f64::NAN)),
            Value::Int(trials.iter().map(|t| t.unstable as i64).sum()),
            Value::Int(violations as i64),
        ],
    };
    Ok((vec![row], violations))
}

/// The sensing pipeline used by `recover-decay` for one trial.
pub fn sensing_pipeline(cfg: &ExperimentConfig, pt: SweepPoint, seed: u64) -> Result<SensingPipeline> {
    let ensemble = StructuredEnsemble::sample(cfg.ensemble, cfg.n, pt.m(), derive_seed(seed, 0))?;
    SensingPipeline::new(ensemble, shaper_for(pt, cfg.alphabet()?)?, condenser_for(pt, Scaling::Hat)?)
}

fn recover_decay(cfg: &ExperimentConfig, pt: SweepPoint) -> Result<(Vec<ResultRow>, usize)> {
    struct Trial {
        error: f64,
        eta: f64,
        realized: f64,
        converged: bool,
        iterations: usize,
        violation: bool,
    }
    let params = SolverParams {
        tolerance: cfg.tolerance,
        max_iterations: cfg.max_iterations,
        ..SolverParams::default()
    };
    let trials = run_trials(cfg, |seed| {
        let pl = sensing_pipeline(cfg, pt, seed)?;
        let x = generate_sparse_signal(cfg.n, cfg.k, derive_seed(seed, 2), &pl.ensemble)?.to_dense();
        let code = pl.measure(&x)?;
        let realized = pl.eta(EtaMode::Oracle, &x, &code)?;
        let analytic = pl.eta(EtaMode::Analytic, &x, &code).ok();
        let eta = match cfg.eta {
            EtaChoice::Oracle => realized,
            EtaChoice::Analytic => analytic.ok_or_else(|| invalid("no analytic eta for this scheme"))?,
        };
        let violation = code.warning.is_none() && analytic.is_some_and(|a| realized > a * (1.0 + 1e-12));
        let sol = pl.recover(&code, eta, params)?;
        Ok(Trial {
            error: norm2(&sub(&sol.x, &x)),
            eta,
            realized,
            converged: sol.converged,
            iterations: sol.iterations,
            violation,
        })
    })?;
    let errors: Vec<f64> = trials.iter().map(|t| t.error).collect();
    let violations = trials.iter().filter(|t| t.violation).count();
    let row = ResultRow {
        point: pt,
        values: vec![
            Value::Float(median(&errors)),
            Value::Float(errors.iter().sum::<f64>() / errors.len() as f64),
            Value::Float(max(&errors)),
            Value::Float(median(&trials.iter().map(|t| t.eta).collect::<Vec<_>>())),
            Value::Float(median(&trials.iter().map(|t| t.realized).collect::<Vec<_>>())),
            Value::Float(trials.iter().filter(|t| t.converged).count() as f64 / trials.len() as f64),
            Value::Float(median(&trials.iter().map(|t| t.iterations as f64).collect::<Vec<_>>())),
            Value::Int(violations as i64),
        ],
    };
    Ok((vec![row], violations))
}

fn rip_estimate(cfg: &ExperimentConfig, pt: SweepPoint) -> Result<(Vec<ResultRow>, usize)> {
    let condenser = condenser_for(pt, Scaling::Hat)?;
    let with_exact = cfg.n <= EXACT_RIP_MAX_N && binomial(cfg.n, cfg.k) <= EXACT_RIP_BUDGET;
    let trials = run_trials(cfg, |seed| {
        let e = StructuredEnsemble::sample(cfg.ensemble, cfg.n, pt.m(), derive_seed(seed, 0))?;
        let sampled = estimate_rip(&e, &condenser, cfg.k, cfg.samples, derive_seed(seed, 3))?.delta;
        let exact = if with_exact {
            exact_rip_small(&e, &condenser, cfg.k)?.delta
        } else {
            f64::NAN
        };
        Ok((sampled, exact))
    })?;
    let sampled: Vec<f64> = trials.iter().map(|t| t.0).collect();
    let exact: Vec<f64> = trials.iter().map(|t| t.1).collect();
    let violations = trials.iter().filter(|(s, e)| *s > e + 1e-9).count();
    let row = ResultRow {
        point: pt,
        values: vec![
            Value::Int(cfg.k as i64),
            Value::Int(cfg.samples as i64),
            Value::Float(median(&sampled)),
            Value::Float(max(&sampled)),
            Value::Float(if with_exact { median(&exact) } else { f64::NAN }),
            Value::Int(violations as i64),
        ],
    };
    Ok((vec![row], violations))
}

fn mrip_levels(cfg: &ExperimentConfig, pt: SweepPoint) -> Result<(Vec<ResultRow>, usize)> {
    let condenser = condenser_for(pt, Scaling::Hat)?;
    let reports = run_trials(cfg, |seed| {
        let e = StructuredEnsemble::sample(cfg.ensemble, cfg.n, pt.m(), derive_seed(seed, 0))?;
        mrip_check(&e, &condenser, cfg.k, cfg.alpha, cfg.samples, derive_seed(seed, 3))
    })?;
    let rows = (0..reports[0].levels.len())
        .map(|i| {
            let first = reports[0].levels[i];
            let deltas: Vec<f64> = reports.iter().map(|r| r.levels[i].estimate.delta).collect();
            let passes = reports.iter().filter(|r| r.levels[i].pass).count();
            ResultRow {
                point: pt,
                values: vec![
                    Value::Int(i64::from(first.level)),
                    Value::Int(first.k as i64),
                    Value::Float(first.threshold),
                    Value::Float(median(&deltas)),
                    Value::Float(passes as f64 / reports.len() as f64),
                ],
            }
        })
        .collect();
    Ok((rows, 0))
}

fn identity(cfg: &ExperimentConfig, pt: SweepPoint) -> Result<(Vec<ResultRow>, usize)> {
    let v = condenser_for(pt, Scaling::Raw)?.v().to_vec();
    let reports = run_trials(cfg, |seed| {
        let e = StructuredEnsemble::sample(cfg.ensemble, cfg.n, pt.m(), derive_seed(seed, 0))?;
        expectation_identity_check(&e, &v, pt.p, IDENTITY_POINTS, derive_seed(seed, 4))
    })?;
    let worst = reports.iter().map(|r| r.max_relative_error).fold(0.0, f64::max);
    let cases: usize = reports.iter().map(|r| r.cases.len()).sum();
    let violations = reports
        .iter()
        .flat_map(|r| &r.cases)
        .filter(|c| c.relative_error >= IDENTITY_TOLERANCE)
        .count();
    let row = ResultRow {
        point: pt,
        values: vec![Value::Int(cases as i64), Value::Float(worst), Value::Int(violations as i64)],
    };
    Ok((vec![row], violations))
}

fn prefix(cfg: &ExperimentConfig, pt: &SweepPoint) -> Vec<String> {
    vec![
        cfg.seed.to_string(),
        cfg.n.to_string(),
        pt.m().to_string(),
        pt.p.to_string(),
        pt.lambda.to_string(),
        pt.scheme.tag().to_string(),
        format_float(pt.scheme.parameter()),
        cfg.levels.to_string(),
        format_float(cfg.delta),
        cfg.trials.to_string(),
    ]
}

pub fn render_csv(cfg: &ExperimentConfig, result: &ExperimentResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# nsq {VERSION}");
    let _ = writeln!(s, "# experiment = {}", result.kind);
    let _ = writeln!(s, "# seed = {}", cfg.seed);
    let _ = writeln!(s, "# config_hash = {}", cfg.hash());
    let header: Vec<&str> = PREFIX_COLUMNS.iter().chain(result.columns.iter()).copied().collect();
    let _ = writeln!(s, "{}", header.join(","));
    for row in &result.rows {
        let mut cells = prefix(cfg, &row.point);
        cells.extend(row.values.iter().map(|v| v.render()));
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

pub fn render_summary(cfg: &ExperimentConfig, result: &ExperimentResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "nsq {VERSION}: {}", result.kind);
    let _ = writeln!(s, "seed {}  config hash {}", cfg.seed, cfg.hash());
    let _ = writeln!(s, "\nconfiguration:");
    for line in cfg.to_kv_string().lines() {
        let _ = writeln!(s, "  {line}");
    }
    let _ = writeln!(s, "\nresults:");
    for row in &result.rows {
        let _ = write!(s, "  {} p={} lambda={}:", row.point.scheme, row.point.p, row.point.lambda);
        for (name, v) in result.columns.iter().zip(&row.values) {
            match v {
                Value::Int(i) => {
                    let _ = write!(s, " {name}={i}");
                }
                Value::Float(x) => {
                    let _ = write!(s, " {name}={x:.6e}");
                }
            }
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "\ninvariant violations: {}", result.violations);
    s
}

/// The metric plotted against `lambda` by the gnuplot script.
fn headline(kind: ExperimentKind) -> (&'static str, bool) {
    match kind {
        ExperimentKind::EmbedDecay => ("median_additive_residual", true),
        ExperimentKind::RecoverDecay => ("median_error", true),
        ExperimentKind::RipEstimate => ("median_delta", false),
        ExperimentKind::MripCheck => ("median_delta", false),
        ExperimentKind::ExpectationIdentity => ("max_relative_error", false),
    }
}

pub fn render_gnuplot(csv: &Path, result: &ExperimentResult) -> String {
    let (metric, logy) = headline(result.kind);
    let col = PREFIX_COLUMNS.len() + result.columns.iter().position(|c| *c == metric).unwrap_or(0) + 1;
    let (x, xlabel) = if result.kind == ExperimentKind::MripCheck {
        (PREFIX_COLUMNS.len() + 1, "level")
    } else {
        (5, "lambda")
    };
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel '{xlabel}'");
    let _ = writeln!(s, "set ylabel '{metric}'");
    if logy {
        let _ = writeln!(s, "set logscale y");
    }
    let _ = writeln!(s, "plot '{}' using {x}:{col} with linespoints", csv.display());
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantize::SchemeSpec;
    use crate::transforms::EnsembleKind;

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            kind,
            n: 64,
            p: 4,
            lambda_sweep: vec![2, 4],
            k: 2,
            trials: 3,
            points: 6,
            samples: 50,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn every_kind_runs() {
        for kind in [
            ExperimentKind::EmbedDecay,
            ExperimentKind::RecoverDecay,
            ExperimentKind::RipEstimate,
            ExperimentKind::MripCheck,
        ] {
            let res = execute(&small(kind)).unwrap();
            assert_eq!(res.violations, 0, "{kind}");
            assert!(!res.rows.is_empty());
            for row in &res.rows {
                assert_eq!(row.values.len(), res.columns.len());
            }
        }
        let mut cfg = small(ExperimentKind::ExpectationIdentity);
        cfg.n = 16;
        cfg.schemes = vec![SchemeSpec::SigmaDelta { order: 1 }];
        cfg.ensemble = EnsembleKind::PartialCirculant;
        let res = execute(&cfg).unwrap();
        assert_eq!(res.violations, 0);
        assert!(res.column("max_relative_error").iter().all(|e| *e < 1e-10));
    }

    #[test]
    fn reruns_are_identical() {
        let cfg = small(ExperimentKind::RecoverDecay);
        let a = execute(&cfg).unwrap();
        let b = execute(&cfg).unwrap();
        assert_eq!(render_csv(&cfg, &a), render_csv(&cfg, &b));
    }

    #[test]
    fn writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(ExperimentKind::RipEstimate);
        cfg.out = dir.path().join("rip.csv");
        cfg.plot = true;
        let out = run_experiment(&cfg).unwrap();
        let csv = fs::read_to_string(&out.csv).unwrap();
        let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("seed,n,m,p,lambda,scheme,r_or_beta,L,delta,trials,k"));
        assert!(csv.contains(&cfg.hash()));
        assert!(fs::read_to_string(&out.summary).unwrap().contains("invariant violations: 0"));
        assert!(out.plot.unwrap().exists());
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 12345.678] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }
}
