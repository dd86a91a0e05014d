use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{check_len, Result};

/// Circular convolution `(z * x)_i = sum_j z_j x_{(i - j) mod n}` via FFT.
pub fn circular_convolve(z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_len("circular_convolve", z.len(), x.len())?;
    let n = z.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let mut zf: Vec<Complex<f64>> = z.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut xf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    forward.process(&mut zf);
    forward.process(&mut xf);
    for (a, b) in xf.iter_mut().zip(&zf) {
        *a *= b;
    }
    inverse.process(&mut xf);
    let scale = 1.0 / n as f64;
    Ok(xf.iter().map(|c| c.re * scale).collect())
}

/// `O(n^2)` reference convolution.
pub fn circular_convolve_direct(z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_len("circular_convolve_direct", z.len(), x.len())?;
    let n = z.len();
    Ok((0..n)
        .map(|i| (0..n).map(|j| z[j] * x[(i + n - j) % n]).sum())
        .collect())
}
