use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// A noise-shaping scheme, i.e. the strictly lower triangular feedback part
/// `H~ = I - H` of its noise transfer operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scheme {
    /// Memoryless scalar quantization, `H = I`.
    Msq,
    /// `r`-th order Sigma-Delta, `H = D^r` over the whole signal.
    SigmaDelta { order: u32 },
    /// Distributed noise shaping, `H = I_p ⊗ H_beta` with blocks of length
    /// `block` and `-beta` on each block's subdiagonal.
    Beta { beta: f64, block: usize },
}

impl Scheme {
    pub fn sigma_delta(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(invalid("Sigma-Delta order must be at least 1"));
        }
        if order > 30 {
            return Err(invalid(format!("Sigma-Delta order {order} is out of range")));
        }
        Ok(Scheme::SigmaDelta { order })
    }

    pub fn beta(beta: f64, block: usize) -> Result<Self> {
        if !(beta.is_finite() && beta > 1.0) {
            return Err(invalid(format!("beta must exceed 1, got {beta}")));
        }
        if block == 0 {
            return Err(invalid("beta block length must be positive"));
        }
        Ok(Scheme::Beta { beta, block })
    }

    /// Feedback taps `c_j = H~_{s, s-j}` for `j = 1..`.
    pub fn feedback_taps(&self) -> Vec<f64> {
        match *self {
            Scheme::Msq => Vec::new(),
            Scheme::SigmaDelta { order } => {
                // D^r = sum_j (-1)^j C(r, j) S^j, so H~ = -sum_{j>=1} (-1)^j C(r, j) S^j.
                let r = order as usize;
                let binom = binomial_row(r);
                (1..=r)
                    .map(|j| if j % 2 == 1 { binom[j] } else { -binom[j] })
                    .collect()
            }
            Scheme::Beta { beta, .. } => vec![beta],
        }
    }

    /// Block length after which the recursion restarts, if any.
    pub fn block_len(&self) -> Option<usize> {
        match *self {
            Scheme::Beta { block, .. } => Some(block),
            _ => None,
        }
    }

    /// `||H~||_{inf -> inf}`: `0` for MSQ, `2^r - 1` for Sigma-Delta, `beta`
    /// for the distributed scheme.
    pub fn feedback_norm(&self) -> f64 {
        self.feedback_taps().iter().map(|c| c.abs()).sum()
    }

    pub fn spec(&self) -> SchemeSpec {
        match *self {
            Scheme::Msq => SchemeSpec::Msq,
            Scheme::SigmaDelta { order } => SchemeSpec::SigmaDelta { order },
            Scheme::Beta { beta, .. } => SchemeSpec::Beta { beta },
        }
    }

    /// `H u` computed from the banded structure.
    pub fn apply_transfer(&self, u: &[f64]) -> Vec<f64> {
        let taps = self.feedback_taps();
        let block = self.block_len();
        (0..u.len())
            .map(|s| {
                let pos = block.map_or(s, |b| s % b);
                let feedback: f64 = taps
                    .iter()
                    .enumerate()
                    .take(pos)
                    .map(|(j, c)| c * u[s - j - 1])
                    .sum();
                u[s] - feedback
            })
            .collect()
    }
}

/// A scheme family without its block length: what a user names on the
/// command line (`msq`, `sd:r=2`, `beta:1.111`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeSpec {
    Msq,
    SigmaDelta { order: u32 },
    Beta { beta: f64 },
}

impl SchemeSpec {
    /// Binds the block length `lambda` (ignored except for the beta scheme).
    pub fn with_lambda(self, lambda: usize) -> Result<Scheme> {
        match self {
            SchemeSpec::Msq => Ok(Scheme::Msq),
            SchemeSpec::SigmaDelta { order } => Scheme::sigma_delta(order),
            SchemeSpec::Beta { beta } => Scheme::beta(beta, lambda),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            SchemeSpec::Msq => "msq",
            SchemeSpec::SigmaDelta { .. } => "sd",
            SchemeSpec::Beta { .. } => "beta",
        }
    }

    /// The scheme parameter: `r` for Sigma-Delta, `beta` for the distributed
    /// scheme, `0` for MSQ.
    pub fn parameter(&self) -> f64 {
        match *self {
            SchemeSpec::Msq => 0.0,
            SchemeSpec::SigmaDelta { order } => f64::from(order),
            SchemeSpec::Beta { beta } => beta,
        }
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSpec::Msq => write!(f, "msq"),
            SchemeSpec::SigmaDelta { order } => write!(f, "sd:r={order}"),
            SchemeSpec::Beta { beta } => write!(f, "beta:{beta}"),
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (family, arg) = s.split_once(':').unwrap_or((s.as_str(), ""));
        match family {
            "msq" => Ok(SchemeSpec::Msq),
            "sd" | "sigma-delta" => {
                let r = arg.strip_prefix("r=").unwrap_or(arg);
                let order: u32 = r
                    .parse()
                    .map_err(|_| invalid(format!("bad Sigma-Delta order in `{s}`")))?;
                Scheme::sigma_delta(order)?;
                Ok(SchemeSpec::SigmaDelta { order })
            }
            "beta" => {
                let b = arg.strip_prefix("beta=").unwrap_or(arg);
                let beta: f64 = b
                    .parse()
                    .map_err(|_| invalid(format!("bad beta value in `{s}`")))?;
                Scheme::beta(beta, 1)?;
                Ok(SchemeSpec::Beta { beta })
            }
            _ => Err(invalid(format!("unknown scheme `{s}`"))),
        }
    }
}

fn binomial_row(r: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..r {
        let mut next = vec![1.0; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_delta_taps() {
        assert_eq!(Scheme::sigma_delta(1).unwrap().feedback_taps(), vec![1.0]);
        assert_eq!(Scheme::sigma_delta(2).unwrap().feedback_taps(), vec![2.0, -1.0]);
        assert_eq!(
            Scheme::sigma_delta(3).unwrap().feedback_taps(),
            vec![3.0, -3.0, 1.0]
        );
    }

    #[test]
    fn feedback_norms() {
        for r in 1..8 {
            let s = Scheme::sigma_delta(r).unwrap();
            assert_eq!(s.feedback_norm(), f64::from((1u32 << r) - 1));
        }
        assert_eq!(Scheme::beta(1.25, 4).unwrap().feedback_norm(), 1.25);
        assert_eq!(Scheme::Msq.feedback_norm(), 0.0);
    }

    #[test]
    fn transfer_of_first_order_is_difference() {
        let s = Scheme::sigma_delta(1).unwrap();
        assert_eq!(s.apply_transfer(&[1.0, 3.0, 6.0]), vec![1.0, 2.0, 3.0]);
        let b = Scheme::beta(2.0, 2).unwrap();
        assert_eq!(b.apply_transfer(&[1.0, 3.0, 6.0, 1.0]), vec![1.0, 1.0, 6.0, -11.0]);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("sd:r=2".parse::<SchemeSpec>().unwrap(), SchemeSpec::SigmaDelta { order: 2 });
        assert_eq!("beta:1.111".parse::<SchemeSpec>().unwrap(), SchemeSpec::Beta { beta: 1.111 });
        assert_eq!("msq".parse::<SchemeSpec>().unwrap(), SchemeSpec::Msq);
        assert!("sd:r=0".parse::<SchemeSpec>().is_err());
        assert!("beta:0.9".parse::<SchemeSpec>().is_err());
        assert!("dither".parse::<SchemeSpec>().is_err());
        for spec in [SchemeSpec::Msq, SchemeSpec::SigmaDelta { order: 3 }, SchemeSpec::Beta { beta: 10.0 / 9.0 }] {
            assert_eq!(spec.to_string().parse::<SchemeSpec>().unwrap(), spec);
        }
    }
}
