use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::fwht::{fwht_in_place, hadamard_entry};
use super::signs::SignVector;
use crate::error::{check_len, Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::{derive_seed, rng_from_seed};

/// Which base matrix the measurement rows come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    /// Rows of the unnormalized `±1` Hadamard matrix, sampled with replacement.
    Hadamard,
    /// Rows of a real Fourier base (DC, interleaved cosine/sine pairs,
    /// Nyquist), scaled so that the largest entry is one. Every row has
    /// squared norm `n / 2`.
    RealDft,
    /// Rows of the circulant matrix generated by a random sign vector.
    PartialCirculant,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Hadamard => "boe-hadamard",
            EnsembleKind::RealDft => "boe-dft",
            EnsembleKind::PartialCirculant => "pce",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "boe-hadamard" | "hadamard" | "boe" => Ok(EnsembleKind::Hadamard),
            "boe-dft" | "dft" | "real-dft" => Ok(EnsembleKind::RealDft),
            "pce" | "circulant" => Ok(EnsembleKind::PartialCirculant),
            other => Err(Error::InvalidParameter(format!(
                "unknown ensemble kind `{other}`"
            ))),
        }
    }
}

#[derive(Clone)]
struct FftPlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPlans {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

/// A sampled measurement operator `Phi` in `R^{m x n}` whose `j`-th row is
/// `eps_j a_j`, with `a_j` drawn from a bounded orthogonal or a partial
/// circulant ensemble.
///
/// Immutable once built; `apply` and `apply_adjoint` take `&self` and may be
/// called from many threads at once.
#[derive(Clone)]
pub struct StructuredEnsemble {
    kind: EnsembleKind,
    n: usize,
    row_index: Vec<usize>,
    row_signs: SignVector,
    generator: Option<SignVector>,
    seed: u64,
    plans: Option<FftPlans>,
    generator_spectrum: Vec<Complex<f64>>,
}

impl fmt::Debug for StructuredEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructuredEnsemble")
            .field("kind", &self.kind)
            .field("n", &self.n)
            .field("m", &self.m())
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl PartialEq for StructuredEnsemble {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.n == other.n
            && self.row_index == other.row_index
            && self.row_signs == other.row_signs
            && self.generator == other.generator
    }
}

// Sub-stream identifiers for the independent random pieces.
const STREAM_ROWS: u64 = 1;
const STREAM_ROW_SIGNS: u64 = 2;
const STREAM_GENERATOR: u64 = 3;

impl StructuredEnsemble {
    /// Draws an `m x n` ensemble of the given kind.
    ///
    /// `n` must be a power of two for every kind. For the partial circulant
    /// ensemble the row set is a uniformly random `m`-subset, so `m <= n`.
    pub fn sample(kind: EnsembleKind, n: usize, m: usize, seed: u64) -> Result<Self> {
        validate_dims(kind, n, m)?;
        let mut rows_rng = rng_from_seed(derive_seed(seed, STREAM_ROWS));
        let row_index = match kind {
            EnsembleKind::Hadamard | EnsembleKind::RealDft => {
                (0..m).map(|_| rows_rng.random_range(0..n)).collect()
            }
            EnsembleKind::PartialCirculant => {
                let mut omega = index::sample(&mut rows_rng, n, m).into_vec();
                omega.sort_unstable();
                omega
            }
        };
        let row_signs = SignVector::random(m, derive_seed(seed, STREAM_ROW_SIGNS));
        let generator = (kind == EnsembleKind::PartialCirculant)
            .then(|| SignVector::random(n, derive_seed(seed, STREAM_GENERATOR)));
        Self::assemble(kind, n, row_index, row_signs, generator, seed)
    }

    /// A partial circulant ensemble with an explicitly chosen row set `omega`.
    pub fn partial_circulant_with_rows(n: usize, omega: Vec<usize>, seed: u64) -> Result<Self> {
        let m = omega.len();
        validate_dims(EnsembleKind::PartialCirculant, n, m)?;
        let row_signs = SignVector::random(m, derive_seed(seed, STREAM_ROW_SIGNS));
        let generator = SignVector::random(n, derive_seed(seed, STREAM_GENERATOR));
        Self::from_parts(
            EnsembleKind::PartialCirculant,
            n,
            omega,
            row_signs,
            Some(generator),
            seed,
        )
    }

    /// Builds an ensemble from fully specified pieces.
    pub fn from_parts(
        kind: EnsembleKind,
        n: usize,
        row_index: Vec<usize>,
        row_signs: SignVector,
        generator: Option<SignVector>,
        seed: u64,
    ) -> Result<Self> {
        validate_dims(kind, n, row_index.len())?;
        check_len("row signs", row_index.len(), row_signs.len())?;
        if let Some(&bad) = row_index.iter().find(|&&r| r >= n) {
            return Err(Error::Construction(format!("row index {bad} outside [0, {n})")));
        }
        match (kind, &generator) {
            (EnsembleKind::PartialCirculant, Some(g)) => {
                check_len("circulant generator", n, g.len())?;
                let mut sorted = row_index.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != row_index.len() {
                    return Err(Error::Construction(
                        "partial circulant row set must be distinct".into(),
                    ));
                }
            }
            (EnsembleKind::PartialCirculant, None) => {
                return Err(Error::Construction(
                    "partial circulant ensemble needs a generator".into(),
                ))
            }
            (_, Some(_)) => {
                return Err(Error::Construction(
                    "only the partial circulant ensemble takes a generator".into(),
                ))
            }
            (_, None) => {}
        }
        Self::assemble(kind, n, row_index, row_signs, generator, seed)
    }

    fn assemble(
        kind: EnsembleKind,
        n: usize,
        row_index: Vec<usize>,
        row_signs: SignVector,
        generator: Option<SignVector>,
        seed: u64,
    ) -> Result<Self> {
        let plans = matches!(kind, EnsembleKind::RealDft | EnsembleKind::PartialCirculant)
            .then(|| FftPlans::new(n));
        let generator_spectrum = match (&generator, &plans) {
            (Some(g), Some(p)) => {
                let mut buf: Vec<Complex<f64>> =
                    (0..n).map(|i| Complex::new(g.get(i), 0.0)).collect();
                p.forward.process(&mut buf);
                buf
            }
            _ => Vec::new(),
        };
        Ok(Self {
            kind,
            n,
            row_index,
            row_signs,
            generator,
            seed,
            plans,
            generator_spectrum,
        })
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of measurements.
    pub fn m(&self) -> usize {
        self.row_index.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row_index(&self) -> &[usize] {
        &self.row_index
    }

    pub fn row_signs(&self) -> &SignVector {
        &self.row_signs
    }

    pub fn generator(&self) -> Option<&SignVector> {
        self.generator.as_ref()
    }

    /// Mean squared entry of the base matrix: `1` for Hadamard and circulant
    /// bases, `1/2` for the real Fourier base.
    pub fn row_energy(&self) -> f64 {
        match self.kind {
            EnsembleKind::RealDft => 0.5,
            _ => 1.0,
        }
    }

    /// Full base transform `B x` (all `n` rows).
    fn base_transform(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            EnsembleKind::Hadamard => {
                let mut out = x.to_vec();
                fwht_in_place(&mut out).expect("n checked at construction");
                out
            }
            EnsembleKind::RealDft => self.real_dft_forward(x),
            EnsembleKind::PartialCirculant => self.circulant_forward(x),
        }
    }

    /// Full base adjoint `B^T z`.
    fn base_adjoint(&self, z: &[f64]) -> Vec<f64> {
        match self.kind {
            EnsembleKind::Hadamard => {
                let mut out = z.to_vec();
                fwht_in_place(&mut out).expect("n checked at construction");
                out
            }
            EnsembleKind::RealDft => self.real_dft_adjoint(z),
            EnsembleKind::PartialCirculant => self.circulant_adjoint(z),
        }
    }

    fn plans(&self) -> &FftPlans {
        self.plans.as_ref().expect("fft plans exist for fourier-based kinds")
    }

    fn real_dft_forward(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.plans().forward.process(&mut buf);
        let mut out = vec![0.0; n];
        out[0] = buf[0].re * FRAC_1_SQRT_2;
        if n > 1 {
            for k in 1..n / 2 {
                // X_k = sum x_j (cos - i sin)
                out[2 * k - 1] = buf[k].re;
                out[2 * k] = -buf[k].im;
            }
            out[n - 1] = buf[n / 2].re * FRAC_1_SQRT_2;
        }
        out
    }

    fn real_dft_adjoint(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        if n == 1 {
            return vec![z[0] * FRAC_1_SQRT_2];
        }
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        buf[0] = Complex::new(z[0] * FRAC_1_SQRT_2, 0.0);
        for k in 1..n / 2 {
            buf[k] = Complex::new(z[2 * k - 1], -z[2 * k]);
        }
        buf[n / 2] = Complex::new(z[n - 1] * FRAC_1_SQRT_2, 0.0);
        self.plans().inverse.process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    fn circulant_forward(&self, x: &[f64]) -> Vec<f64> {
        self.circulant_with(x, false)
    }

    fn circulant_adjoint(&self, z: &[f64]) -> Vec<f64> {
        self.circulant_with(z, true)
    }

    fn circulant_with(&self, x: &[f64], adjoint: bool) -> Vec<f64> {
        let plans = self.plans();
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        plans.forward.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.generator_spectrum) {
            *b *= if adjoint { s.conj() } else { *s };
        }
        plans.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// `Phi x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("ensemble apply", self.n, x.len())?;
        let full = self.base_transform(x);
        Ok(self
            .row_index
            .iter()
            .enumerate()
            .map(|(j, &r)| self.row_signs.get(j) * full[r])
            .collect())
    }

    /// `Phi^T y`.
    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("ensemble adjoint", self.m(), y.len())?;
        let mut scattered = vec![0.0; self.n];
        for (j, (&r, &yj)) in self.row_index.iter().zip(y).enumerate() {
            scattered[r] += self.row_signs.get(j) * yj;
        }
        Ok(self.base_adjoint(&scattered))
    }

    /// Materializes row `i` of the base matrix entry by entry.
    pub fn base_row(&self, i: usize) -> Vec<f64> {
        let n = self.n;
        match self.kind {
            EnsembleKind::Hadamard => (0..n).map(|j| hadamard_entry(i, j)).collect(),
            EnsembleKind::RealDft => (0..n).map(|j| real_dft_entry(n, i, j)).collect(),
            EnsembleKind::PartialCirculant => {
                let g = self.generator.as_ref().expect("circulant has a generator");
                (0..n).map(|j| g.get((i + n - j) % n)).collect()
            }
        }
    }

    /// Materializes row `j` of `Phi`.
    pub fn row(&self, j: usize) -> Vec<f64> {
        let s = self.row_signs.get(j);
        self.base_row(self.row_index[j])
            .into_iter()
            .map(|v| s * v)
            .collect()
    }

    /// Dense `m x n` copy of `Phi`, built row by row from explicit entries.
    pub fn to_dense(&self) -> DenseMatrix {
        let rows: Vec<Vec<f64>> = (0..self.m()).map(|j| self.row(j)).collect();
        DenseMatrix::from_rows(&rows)
    }
}

/// Entry `(i, j)` of the real Fourier base with max-entry one.
pub(crate) fn real_dft_entry(n: usize, i: usize, j: usize) -> f64 {
    if i == 0 {
        return FRAC_1_SQRT_2;
    }
    if i == n - 1 {
        return if j % 2 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    }
    let k = (i + 1) / 2;
    let theta = 2.0 * PI * ((k * j) % n) as f64 / n as f64;
    if i % 2 == 1 {
        theta.cos()
    } else {
        theta.sin()
    }
}

fn validate_dims(kind: EnsembleKind, n: usize, m: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Construction(format!(
            "ambient dimension {n} must be a power of two"
        )));
    }
    if kind == EnsembleKind::RealDft && n < 2 {
        return Err(Error::Construction("real Fourier base needs n >= 2".into()));
    }
    if m == 0 {
        return Err(Error::Construction("need at least one measurement".into()));
    }
    if kind == EnsembleKind::PartialCirculant && m > n {
        return Err(Error::Construction(format!(
            "partial circulant row set of size {m} exceeds n = {n}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm2};
    use crate::rng::gaussian_vec;

    const KINDS: [EnsembleKind; 3] = [
        EnsembleKind::Hadamard,
        EnsembleKind::RealDft,
        EnsembleKind::PartialCirculant,
    ];

    #[test]
    fn boe_rows_are_in_range() {
        let e = StructuredEnsemble::sample(EnsembleKind::Hadamard, 8, 8, 5).unwrap();
        assert_eq!(e.m(), 8);
        assert!(e.row_index().iter().all(|&r| r < 8));
    }

    #[test]
    fn pce_rows_distinct() {
        let e = StructuredEnsemble::sample(EnsembleKind::PartialCirculant, 8, 4, 5).unwrap();
        let mut rows = e.row_index().to_vec();
        rows.dedup();
        assert_eq!(rows.len(), 4);
    }

    #[test]
    fn same_seed_same_ensemble() {
        for kind in KINDS {
            let a = StructuredEnsemble::sample(kind, 16, 8, 77).unwrap();
            let b = StructuredEnsemble::sample(kind, 16, 8, 77).unwrap();
            assert_eq!(a, b);
            let x = gaussian_vec(&mut rng_from_seed(1), 16);
            assert_eq!(a.apply(&x).unwrap(), b.apply(&x).unwrap());
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        for kind in KINDS {
            let e = StructuredEnsemble::sample(kind, 16, 8, 3).unwrap();
            assert!(e.apply(&[0.0; 16]).unwrap().iter().all(|&v| v == 0.0));
            assert!(e.apply_adjoint(&[0.0; 8]).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn identity_rows_give_first_column() {
        let e = StructuredEnsemble::from_parts(
            EnsembleKind::Hadamard,
            8,
            (0..8).collect(),
            SignVector::ones(8),
            None,
            0,
        )
        .unwrap();
        let mut e1 = vec![0.0; 8];
        e1[0] = 1.0;
        assert_eq!(e.apply(&e1).unwrap(), vec![1.0; 8]);
        let x = gaussian_vec(&mut rng_from_seed(2), 8);
        let back = e.apply_adjoint(&e.apply(&x).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&x) {
            assert!((a - 8.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn pce_matches_dense_submatrix() {
        let e = StructuredEnsemble::sample(EnsembleKind::PartialCirculant, 16, 6, 19).unwrap();
        let x = gaussian_vec(&mut rng_from_seed(4), 16);
        let fast = e.apply(&x).unwrap();
        let g = e.generator().unwrap();
        for (j, &i) in e.row_index().iter().enumerate() {
            // row i of H_sigma: entries sigma_{(i - c) mod n}
            let direct: f64 = (0..16)
                .map(|c| g.get((i + 16 - c) % 16) * x[c])
                .sum::<f64>()
                * e.row_signs().get(j);
            assert!((fast[j] - direct).abs() < 1e-9 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn real_dft_base_is_orthogonal_with_bounded_entries() {
        let n = 16;
        let e = StructuredEnsemble::sample(EnsembleKind::RealDft, n, 4, 0).unwrap();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| e.base_row(i)).collect();
        for (i, ri) in rows.iter().enumerate() {
            assert!(ri.iter().all(|v| v.abs() <= 1.0 + 1e-15));
            for (j, rj) in rows.iter().enumerate() {
                let expected = if i == j { n as f64 / 2.0 } else { 0.0 };
                assert!((dot(ri, rj) - expected).abs() < 1e-10, "rows {i},{j}");
            }
        }
    }

    #[test]
    fn adjoint_identity_all_kinds() {
        let mut rng = rng_from_seed(8);
        for kind in KINDS {
            let e = StructuredEnsemble::sample(kind, 64, 24, 12).unwrap();
            for _ in 0..20 {
                let x = gaussian_vec(&mut rng, 64);
                let y = gaussian_vec(&mut rng, 24);
                let lhs = dot(&e.apply(&x).unwrap(), &y);
                let rhs = dot(&x, &e.apply_adjoint(&y).unwrap());
                assert!((lhs - rhs).abs() <= 1e-10 * norm2(&x) * norm2(&y), "{kind}");
            }
        }
    }

    #[test]
    fn construction_errors() {
        assert!(StructuredEnsemble::sample(EnsembleKind::Hadamard, 12, 4, 0).is_err());
        assert!(StructuredEnsemble::sample(EnsembleKind::PartialCirculant, 8, 9, 0).is_err());
        assert!(StructuredEnsemble::sample(EnsembleKind::Hadamard, 8, 0, 0).is_err());
        assert!(StructuredEnsemble::partial_circulant_with_rows(8, vec![1, 1], 0).is_err());
        let e = StructuredEnsemble::sample(EnsembleKind::Hadamard, 8, 4, 0).unwrap();
        assert!(e.apply(&[0.0; 4]).is_err());
        assert!(e.apply_adjoint(&[0.0; 8]).is_err());
    }

    #[test]
    fn kind_round_trips_through_str() {
        for kind in KINDS {
            assert_eq!(kind.name().parse::<EnsembleKind>().unwrap(), kind);
        }
    }
}
