use crate::error::{check_len, invalid, Result};
use crate::rng::{random_signs, rng_from_seed};

/// A vector of `±1` entries together with the seed that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignVector {
    entries: Vec<i8>,
    seed: u64,
}

impl SignVector {
    pub fn random(len: usize, seed: u64) -> Self {
        Self {
            entries: random_signs(&mut rng_from_seed(seed), len),
            seed,
        }
    }

    /// Wraps explicit entries; every entry must be `+1` or `-1`.
    pub fn from_entries(entries: Vec<i8>, seed: u64) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|&&s| s != 1 && s != -1) {
            return Err(invalid(format!("sign entry {bad} is not ±1")));
        }
        Ok(Self { entries, seed })
    }

    pub fn ones(len: usize) -> Self {
        Self {
            entries: vec![1; len],
            seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        f64::from(self.entries[i])
    }

    /// Entrywise product `D x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("sign vector", self.len(), x.len())?;
        Ok(x.iter()
            .zip(&self.entries)
            .map(|(&v, &s)| if s < 0 { -v } else { v })
            .collect())
    }
}

/// Applies the diagonal sign matrix `D_eps` to `x`.
pub fn apply_column_signs(d: &SignVector, x: &[f64]) -> Result<Vec<f64>> {
    d.apply(x)
}
