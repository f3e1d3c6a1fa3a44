//! Spectra of the time-band-limiting operator: low-pass projection restricted
//! to a contiguous block of grid points, plus the closed-form asymptotics for
//! its smallest eigenvalues.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues below this are not trustworthy in double precision.
pub const NUMERICAL_FLOOR: f64 = 1e-14;

/// Low-pass projection onto `n` frequencies, restricted to `k` consecutive
/// samples of a length-`N` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeBandOperator {
    n_grid: usize,
    n: usize,
    matrix: DMatrix<f64>,
}

/// `(1/N) sin(pi n d / N) / sin(pi d / N)`, the Dirichlet kernel at lag `d`.
///
/// Even in `d`; `N`-periodic for odd `n` and `N`-antiperiodic for even `n`, so
/// the lag is not reduced modulo `N`.
pub fn dirichlet(n_grid: usize, n: usize, d: i64) -> f64 {
    let nf = n_grid as f64;
    if d.rem_euclid(n_grid as i64) == 0 {
        let flip = (d / n_grid as i64) * (n as i64 - 1);
        return if flip % 2 == 0 { n as f64 / nf } else { -(n as f64) / nf };
    }
    let x = std::f64::consts::PI * d as f64 / nf;
    (n as f64 * x).sin() / (nf * x.sin())
}

impl TimeBandOperator {
    pub fn new(n_grid: usize, n: usize, k: usize) -> Result<Self> {
        if n == 0 || n > n_grid || k == 0 || k > n_grid {
            return Err(Error::InvalidInput(format!(
                "need 0 < n <= N and 0 < k <= N (N = {n_grid}, n = {n}, k = {k})"
            )));
        }
        // the kernel is real for any n: odd n is the symmetric band, even n
        // differs from a symmetric band by a modulation that leaves the
        // spectrum unchanged
        let matrix = DMatrix::from_fn(k, k, |i, j| dirichlet(n_grid, n, i as i64 - j as i64));
        Ok(Self { n_grid, n, matrix })
    }

    pub fn k(&self) -> usize {
        self.matrix.nrows()
    }

    /// Half-bandwidth `W = n / (2N)`.
    pub fn half_bandwidth(&self) -> f64 {
        self.n as f64 / (2.0 * self.n_grid as f64)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn spectrum(&self) -> Spectrum {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let mut raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        raw.sort_by(|a, b| b.total_cmp(a));
        Spectrum::from_raw(raw)
    }
}

/// Eigenvalues sorted in decreasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub raw: Vec<f64>,
    /// `raw` clamped to `[0, 1]`.
    pub clamped: Vec<f64>,
    /// Whether each value is below the numerical floor.
    pub below_floor: Vec<bool>,
}

impl Spectrum {
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let clamped = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let below_floor = raw.iter().map(|&v| v < NUMERICAL_FLOOR).collect();
        Self {
            raw,
            clamped,
            below_floor,
        }
    }

    pub fn count_at_most(&self, threshold: f64) -> usize {
        self.raw.iter().filter(|&&v| v <= threshold).count()
    }

    pub fn floor_count(&self) -> usize {
        self.below_floor.iter().filter(|&&b| b).count()
    }
}

/// Eigenvalues of the time-band operator, sorted in decreasing order.
pub fn timeband_spectrum(n_grid: usize, n: usize, k: usize) -> Result<Spectrum> {
    Ok(TimeBandOperator::new(n_grid, n, k)?.spectrum())
}

/// Number of eigenvalues strictly above `hi`.
pub fn cluster_count(eigenvalues: &[f64], hi: f64) -> usize {
    eigenvalues.iter().filter(|&&v| v > hi).count()
}

/// Asymptotic size of the small eigenvalues, kept in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticLambda {
    /// Natural log of the prefactor.
    pub log_prefactor: f64,
    /// Decay rate per unit of `k + 1`.
    pub gamma: f64,
    /// Natural log of the eigenvalue.
    pub log_lambda: f64,
    pub log10_lambda: f64,
    /// `exp(log_lambda)`; zero when it underflows.
    pub value: f64,
}

fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|i| (i as f64).ln()).sum()
}

/// Decay rate `log(1 + 2 sqrt(a) / (sqrt(2) - sqrt(a)))` with `a = 1 + cos 2 pi W`.
pub fn decay_rate(w: f64) -> Result<f64> {
    if !(w > 0.0 && w < 0.5) {
        return Err(Error::Domain(format!("half-bandwidth {w} outside (0, 1/2)")));
    }
    let a = 1.0 + (2.0 * std::f64::consts::PI * w).cos();
    let sa = a.sqrt();
    Ok((2.0 * sa / (std::f64::consts::SQRT_2 - sa)).ln_1p())
}

/// Approximation of the `j`-th eigenvalue (`j` near `k`) for a support of `k`
/// consecutive samples and half-bandwidth `w`.
///
/// The factor `(2 - a)^(k - j + 1/2)` multiplies the prefactor; with it in the
/// denominator the closed form does not reproduce the constants 5.22 and 3.87
/// quoted for SRF 4 and 1.05, with it in the numerator it does.
pub fn asymptotic_lambda(k: usize, j: usize, w: f64) -> Result<AsymptoticLambda> {
    if j > k {
        return Err(Error::InvalidInput(format!("index {j} exceeds k = {k}")));
    }
    let gamma = decay_rate(w)?;
    let a = 1.0 + (2.0 * std::f64::consts::PI * w).cos();
    let m = (k - j) as f64;
    let kp1 = (k + 1) as f64;
    let log_prefactor = 0.5 * std::f64::consts::PI.ln()
        + (14.0 * m + 9.0) / 4.0 * std::f64::consts::LN_2
        + (2.0 * m + 1.0) / 4.0 * a.ln()
        + (m + 0.5) * kp1.ln()
        - ln_factorial(k - j)
        + (m + 0.5) * (2.0 - a).ln();
    let log_lambda = log_prefactor - gamma * kp1;
    Ok(AsymptoticLambda {
        log_prefactor,
        gamma,
        log_lambda,
        log10_lambda: log_lambda / std::f64::consts::LN_10,
        value: log_lambda.exp(),
    })
}

/// Large-SRF form `log lambda ~ -(log(16/pi^2) + 2 log SRF) k`.
pub fn large_srf_log_lambda(srf: f64, k: usize) -> f64 {
    let c = (16.0 / (std::f64::consts::PI * std::f64::consts::PI)).ln();
    -(c + 2.0 * srf.ln()) * k as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample() {
        let s = timeband_spectrum(64, 9, 1).unwrap();
        assert_eq!(s.raw.len(), 1);
        assert!((s.raw[0] - 9.0 / 64.0).abs() < 1e-15);
        let s = timeband_spectrum(16, 16, 1).unwrap();
        assert_eq!(cluster_count(&s.raw, 0.5), 1);
        assert_eq!(cluster_count(&[0.0; 5], 0.5), 0);
    }

    #[test]
    fn trace_and_range() {
        let s = timeband_spectrum(256, 33, 40).unwrap();
        let tr: f64 = s.raw.iter().sum();
        assert!((tr - 40.0 * 33.0 / 256.0).abs() < 1e-8);
        assert!(s.raw.iter().all(|&v| v > -1e-12 && v < 1.0 + 1e-12));
        assert!(s.raw.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn displayed_constants() {
        // SRF = 4
        let a = asymptotic_lambda(10, 10, 1.0 / 8.0).unwrap();
        assert!((a.log_prefactor.exp() / 11f64.sqrt() - 5.22).abs() < 0.005);
        assert!((a.gamma - 3.23).abs() < 0.005);
        // SRF = 1.05
        let b = asymptotic_lambda(10, 10, 1.0 / 2.1).unwrap();
        assert!((b.log_prefactor.exp() / 11f64.sqrt() - 3.87).abs() < 0.005);
        assert!((b.gamma - 0.15).abs() < 0.005);
        let c = asymptotic_lambda(48, 48, 1.0 / 8.0).unwrap();
        assert!(c.log10_lambda <= -67.15, "{}", c.log10_lambda);
        assert!((large_srf_log_lambda(std::f64::consts::E, 10) + 24.831).abs() < 1e-3);
        assert!(asymptotic_lambda(4, 4, 0.5).is_err());
        assert!(asymptotic_lambda(4, 5, 0.25).is_err());
    }

    #[test]
    fn mild_srf_is_already_ill_posed() {
        let a = asymptotic_lambda(255, 255, 1.0 / 2.1).unwrap();
        // the quoted 1.2e-15 is the eigenvalue itself
        assert!((a.log10_lambda - 1.2e-15f64.log10()).abs() < 0.5, "{}", a.log10_lambda);
    }
}
