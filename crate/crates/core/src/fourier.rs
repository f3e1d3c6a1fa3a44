//! FFT-backed partial DFT and trigonometric-polynomial evaluation.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// The low-frequency rows `|k| <= fc` of the length-N DFT, applied with
/// fast transforms. Output order is increasing `k`.
#[derive(Clone)]
pub struct PartialDft {
    n_grid: usize,
    fc: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PartialDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PartialDft")
            .field("n_grid", &self.n_grid)
            .field("fc", &self.fc)
            .finish()
    }
}

impl PartialDft {
    pub fn new(n_grid: usize, fc: usize) -> Self {
        assert!(n_grid > 2 * fc, "grid too small for cutoff");
        let mut planner = FftPlanner::new();
        Self {
            n_grid,
            fc,
            fwd: planner.plan_fft_forward(n_grid),
            inv: planner.plan_fft_inverse(n_grid),
        }
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    pub fn fc(&self) -> usize {
        self.fc
    }

    pub fn n(&self) -> usize {
        2 * self.fc + 1
    }

    /// `y_k = sum_t x_t e^{-i 2 pi k t / N}`.
    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n_grid);
        let mut buf = x.to_vec();
        self.fwd.process(&mut buf);
        let fc = self.fc as i64;
        let n = self.n_grid as i64;
        (-fc..=fc).map(|k| buf[k.rem_euclid(n) as usize]).collect()
    }

    /// Adjoint: `x_t = sum_k y_k e^{i 2 pi k t / N}`.
    pub fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.n());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n_grid];
        let fc = self.fc as i64;
        let n = self.n_grid as i64;
        for (i, &v) in y.iter().enumerate() {
            buf[(i as i64 - fc).rem_euclid(n) as usize] = v;
        }
        self.inv.process(&mut buf);
        buf
    }

    /// In-place low-pass projection, without intermediate allocations.
    pub fn lowpass_in_place(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n_grid);
        self.fwd.process(buf);
        let scale = 1.0 / self.n_grid as f64;
        for (i, v) in buf.iter_mut().enumerate() {
            if i <= self.fc || i >= self.n_grid - self.fc {
                *v *= scale;
            } else {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        self.inv.process(buf);
    }

    /// Orthogonal projection onto low-pass signals, `(1/N) F* F x`.
    pub fn lowpass(&self, x: &[Complex64]) -> Vec<Complex64> {
        let scale = 1.0 / self.n_grid as f64;
        self.adjoint(&self.forward(x))
            .into_iter()
            .map(|v| v * scale)
            .collect()
    }
}

/// Evaluates `sum_{|k|<=fc} c_k e^{i 2 pi k m / M}` for `m = 0..M`.
/// Coefficients are in increasing-`k` order; frequencies alias when `M < 2fc+1`.
pub fn eval_trig_poly_grid(coeffs: &[Complex64], fc: usize, m: usize) -> Vec<Complex64> {
    debug_assert_eq!(coeffs.len(), 2 * fc + 1);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    let fc = fc as i64;
    for (i, &c) in coeffs.iter().enumerate() {
        buf[(i as i64 - fc).rem_euclid(m as i64) as usize] += c;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    buf
}

/// Evaluates a trigonometric polynomial and its first two derivatives at `t`.
pub fn eval_trig_poly(coeffs: &[Complex64], fc: usize, t: f64) -> [Complex64; 3] {
    let w = 2.0 * std::f64::consts::PI;
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (i, &c) in coeffs.iter().enumerate() {
        let k = i as f64 - fc as f64;
        let e = c * Complex64::from_polar(1.0, w * k * t);
        let ik = Complex64::new(0.0, w * k);
        out[0] += e;
        out[1] += ik * e;
        out[2] += ik * ik * e;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft(x: &[Complex64], fc: usize) -> Vec<Complex64> {
        let n = x.len() as f64;
        (-(fc as i64)..=fc as i64)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(t, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * t as f64 / n))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn forward_matches_naive_sum() {
        let x: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let op = PartialDft::new(64, 8);
        let fast = op.forward(&x);
        let slow = naive_dft(&x, 8);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_is_adjoint() {
        let op = PartialDft::new(40, 5);
        let x: Vec<Complex64> = (0..40).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let y: Vec<Complex64> = (0..11).map(|i| Complex64::new(1.0 / (i as f64 + 1.0), i as f64)).collect();
        let lhs: Complex64 = op.forward(&x).iter().zip(&y).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex64 = x.iter().zip(op.adjoint(&y)).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-9 * lhs.norm());
    }

    #[test]
    fn lowpass_is_idempotent() {
        let op = PartialDft::new(32, 4);
        let x: Vec<Complex64> = (0..32).map(|i| Complex64::new((i * i % 7) as f64, 0.0)).collect();
        let p1 = op.lowpass(&x);
        let p2 = op.lowpass(&p1);
        for (a, b) in p1.iter().zip(&p2) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn grid_eval_matches_pointwise() {
        let c: Vec<Complex64> = (0..9).map(|i| Complex64::new(i as f64 - 4.0, 0.5 * i as f64)).collect();
        for m in [5, 9, 64] {
            let g = eval_trig_poly_grid(&c, 4, m);
            for (j, v) in g.iter().enumerate() {
                let p = eval_trig_poly(&c, 4, j as f64 / m as f64)[0];
                assert!((v - p).norm() < 1e-11, "m={m} j={j}");
            }
        }
    }
}
