//! Trigonometric polynomials and their L^p norms on the circle.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::KahanSum;

/// `Σ_{j} coeffs[j] e^{2πi (min_freq + j) t}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub min_freq: i64,
    pub coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn new(min_freq: i64, coeffs: Vec<Complex64>) -> Self {
        TrigPoly { min_freq, coeffs }
    }

    /// `e_1 + … + e_n`.
    pub fn dirichlet(n: usize) -> Self {
        TrigPoly::new(1, vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn max_freq(&self) -> i64 {
        self.min_freq + self.coeffs.len() as i64 - 1
    }

    /// Largest `|n|` carrying a coefficient.
    pub fn window(&self) -> u64 {
        if self.coeffs.is_empty() {
            return 0;
        }
        self.min_freq.unsigned_abs().max(self.max_freq().unsigned_abs())
    }

    /// Values at `t = j / grid`, `j = 0..grid`.
    pub fn sample(&self, grid: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); grid];
        for (j, c) in self.coeffs.iter().enumerate() {
            let n = self.min_freq + j as i64;
            buf[n.rem_euclid(grid as i64) as usize] += c;
        }
        // the unnormalized inverse transform is exactly Σ c_n e^{2πi n j / grid}
        FftPlanner::new().plan_fft_inverse(grid).process(&mut buf);
        buf
    }

    /// Coefficients for frequencies `min_freq..=max_freq` of sampled values.
    pub fn from_samples(samples: &[Complex64], min_freq: i64, max_freq: i64) -> Self {
        let grid = samples.len();
        let mut buf = samples.to_vec();
        FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
        let scale = 1.0 / grid as f64;
        let coeffs = (min_freq..=max_freq).map(|n| buf[n.rem_euclid(grid as i64) as usize] * scale).collect();
        TrigPoly::new(min_freq, coeffs)
    }
}

/// Minimum grid size accepted for a polynomial of the given window.
pub fn min_grid(window: u64) -> usize {
    (4 * window).max(1) as usize
}

/// `(∫_0^1 |f|^p)^{1/p}` by the periodic trapezoidal rule on `grid` points.
pub fn lp_norm_trig(f: &TrigPoly, p: f64, grid: usize) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    let needed = min_grid(f.window());
    if grid < needed {
        return Err(Error::Aliasing { grid, needed });
    }
    Ok(lp_norm_samples(&f.sample(grid), p))
}

pub(crate) fn lp_norm_samples(values: &[Complex64], p: f64) -> f64 {
    let s: KahanSum = values.iter().map(|z| z.norm().powf(p)).collect();
    (s.value() / values.len() as f64).powf(1.0 / p)
}
