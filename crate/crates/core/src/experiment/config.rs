use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::condense::{Condenser, Scaling};
use crate::error::{invalid, Error, Result};
use crate::quantize::{Alphabet, NoiseShaper, SchemeSpec};
use crate::transforms::EnsembleKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    EmbedDecay,
    RecoverDecay,
    RipEstimate,
    MripCheck,
    ExpectationIdentity,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::EmbedDecay => "embed-decay",
            ExperimentKind::RecoverDecay => "recover-decay",
            ExperimentKind::RipEstimate => "rip-estimate",
            ExperimentKind::MripCheck => "mrip-check",
            ExperimentKind::ExpectationIdentity => "expectation-identity",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ExperimentKind::EmbedDecay,
            ExperimentKind::RecoverDecay,
            ExperimentKind::RipEstimate,
            ExperimentKind::MripCheck,
            ExperimentKind::ExpectationIdentity,
        ]
        .into_iter()
        .find(|k| k.name() == s.trim())
        .ok_or_else(|| invalid(format!("unknown experiment `{s}`")))
    }
}

/// Where the recovery constraint's `eta` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaChoice {
    Analytic,
    Oracle,
}

impl fmt::Display for EtaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EtaChoice::Analytic => "analytic",
            EtaChoice::Oracle => "oracle",
        })
    }
}

impl FromStr for EtaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "analytic" => Ok(EtaChoice::Analytic),
            "oracle" => Ok(EtaChoice::Oracle),
            other => Err(invalid(format!("eta must be `analytic` or `oracle`, got `{other}`"))),
        }
    }
}

/// Everything needed to rerun an experiment.
///
/// The text form is one `key = value` pair per line; `#` starts a comment.
/// Lists are comma separated.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub ensemble: EnsembleKind,
    pub n: usize,
    /// Fixed measurement count; only used when `lambda_sweep` is empty.
    pub m: Option<usize>,
    pub p: usize,
    pub lambda_sweep: Vec<usize>,
    pub k: usize,
    pub schemes: Vec<SchemeSpec>,
    /// Levels per side `L` of the alphabet.
    pub levels: u32,
    pub delta: f64,
    /// Independent repetitions per sweep point.
    pub trials: usize,
    pub seed: u64,
    /// Points per embedding trial.
    pub points: usize,
    /// Multiplicative distortion granted in embedding reports.
    pub alpha: f64,
    pub eta: EtaChoice,
    /// Sampled vectors per RIP estimate.
    pub samples: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub out: PathBuf,
    pub plot: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::EmbedDecay,
            ensemble: EnsembleKind::Hadamard,
            n: 1024,
            m: None,
            p: 16,
            lambda_sweep: vec![4, 8, 16, 32],
            k: 5,
            schemes: vec![SchemeSpec::Beta { beta: 10.0 / 9.0 }],
            levels: 1,
            delta: 1.0,
            trials: 20,
            seed: 0,
            points: 32,
            alpha: 0.5,
            eta: EtaChoice::Analytic,
            samples: 1000,
            tolerance: 1e-6,
            max_iterations: 20_000,
            out: PathBuf::from("results.csv"),
            plot: false,
        }
    }
}

/// One `(scheme, p, lambda)` combination of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub scheme: SchemeSpec,
    pub p: usize,
    pub lambda: usize,
}

impl SweepPoint {
    pub fn m(&self) -> usize {
        self.p * self.lambda
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| invalid(format!("bad value `{value}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Sets one field from its text form. Keys may use `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_").to_ascii_lowercase();
        let v = value.trim();
        match key.as_str() {
            "kind" => self.kind = v.parse()?,
            "ensemble" => self.ensemble = v.parse()?,
            "n" => self.n = parse_num(&key, v)?,
            "m" => {
                self.m = if v.is_empty() || v == "auto" {
                    None
                } else {
                    Some(parse_num(&key, v)?)
                }
            }
            "p" => self.p = parse_num(&key, v)?,
            "lambda_sweep" | "lambda" => self.lambda_sweep = parse_list(&key, v)?,
            "k" => self.k = parse_num(&key, v)?,
            "scheme" | "schemes" => self.schemes = parse_list(&key, v)?,
            "levels" | "l" => self.levels = parse_num(&key, v)?,
            "delta" => self.delta = parse_num(&key, v)?,
            "trials" => self.trials = parse_num(&key, v)?,
            "seed" => self.seed = parse_num(&key, v)?,
            "points" => self.points = parse_num(&key, v)?,
            "alpha" => self.alpha = parse_num(&key, v)?,
            "eta" => self.eta = v.parse()?,
            "samples" => self.samples = parse_num(&key, v)?,
            "tolerance" => self.tolerance = parse_num(&key, v)?,
            "max_iterations" => self.max_iterations = parse_num(&key, v)?,
            "out" => self.out = PathBuf::from(v),
            "plot" => self.plot = parse_num(&key, v)?,
            other => return Err(invalid(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge_str(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_kv_str(&fs::read_to_string(path)?)
    }

    /// Canonical text form; parses back to an equal config.
    pub fn to_kv_string(&self) -> String {
        let m = self.m.map_or_else(|| "auto".to_string(), |m| m.to_string());
        let mut s = String::new();
        for (key, value) in [
            ("kind", self.kind.to_string()),
            ("ensemble", self.ensemble.to_string()),
            ("n", self.n.to_string()),
            ("m", m),
            ("p", self.p.to_string()),
            ("lambda_sweep", join(&self.lambda_sweep)),
            ("k", self.k.to_string()),
            ("scheme", join(&self.schemes)),
            ("levels", self.levels.to_string()),
            ("delta", self.delta.to_string()),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("points", self.points.to_string()),
            ("alpha", self.alpha.to_string()),
            ("eta", self.eta.to_string()),
            ("samples", self.samples.to_string()),
            ("tolerance", self.tolerance.to_string()),
            ("max_iterations", self.max_iterations.to_string()),
            ("out", self.out.display().to_string()),
            ("plot", self.plot.to_string()),
        ] {
            s.push_str(key);
            s.push_str(" = ");
            s.push_str(&value);
            s.push('\n');
        }
        s
    }

    /// SHA-256 of the canonical form without the output settings, as hex.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = PathBuf::new();
        canonical.plot = false;
        Sha256::digest(canonical.to_kv_string().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::new(self.levels, self.delta)
    }

    /// Expands the sweep, checking that every point has an integral
    /// `lambda = m / p`.
    pub fn sweep(&self) -> Result<Vec<SweepPoint>> {
        if self.p == 0 {
            return Err(invalid("p must be positive"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("no scheme given"));
        }
        let lambdas = if self.lambda_sweep.is_empty() {
            let m = self.m.ok_or_else(|| invalid("give either m or a lambda sweep"))?;
            if m == 0 || m % self.p != 0 {
                return Err(invalid(format!("p = {} does not divide m = {m}", self.p)));
            }
            vec![m / self.p]
        } else {
            self.lambda_sweep.clone()
        };
        if lambdas.contains(&0) {
            return Err(invalid("lambda must be positive"));
        }
        Ok(self
            .schemes
            .iter()
            .flat_map(|&scheme| lambdas.iter().map(move |&lambda| SweepPoint { scheme, p: self.p, lambda }))
            .collect())
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        self.alphabet()?;
        for pt in self.sweep()? {
            condenser_for(pt, Scaling::Hat)?;
            shaper_for(pt, self.alphabet()?)?;
        }
        if self.trials == 0 {
            return Err(invalid("trials must be positive"));
        }
        if self.k == 0 || self.k > self.n {
            return Err(invalid(format!("k = {} must lie in 1..={}", self.k, self.n)));
        }
        Ok(())
    }
}

/// The condenser matched to a sweep point's scheme; memoryless
/// quantization uses a plain block sum.
pub fn condenser_for(pt: SweepPoint, scaling: Scaling) -> Result<Condenser> {
    match pt.scheme {
        SchemeSpec::Msq => Condenser::from_vector(vec![1.0; pt.lambda], pt.p, scaling),
        SchemeSpec::SigmaDelta { order } => Condenser::sigma_delta_for_lambda(order, pt.lambda, pt.p, scaling),
        SchemeSpec::Beta { beta } => Condenser::beta(beta, pt.lambda, pt.p, scaling),
    }
}

pub fn shaper_for(pt: SweepPoint, alphabet: Alphabet) -> Result<NoiseShaper> {
    Ok(NoiseShaper::new(pt.scheme.with_lambda(pt.lambda)?, alphabet))
}
