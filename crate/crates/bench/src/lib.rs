//! Shared fixtures for the benchmarks.

use num_complex::Complex64;
use superres_core::{harness, AtomicMeasure, SampleVector};

/// A separated random instance at `fc` with `k` spikes, minimum separation
/// `2 / fc`.
pub fn instance(fc: usize, k: usize, seed: u64) -> (AtomicMeasure, SampleVector) {
    harness::simulate(fc, k, 2.0, seed).expect("fixture parameters are valid")
}

/// Unit-modulus sign pattern of an instance.
pub fn phases(x: &AtomicMeasure) -> Vec<Complex64> {
    x.amplitudes().iter().map(|a| a / a.norm()).collect()
}

/// Grid signal with `k` equispaced unit spikes.
pub fn grid_spikes(n_grid: usize, k: usize) -> Vec<Complex64> {
    let mut x = vec![Complex64::new(0.0, 0.0); n_grid];
    for j in 0..k {
        x[j * n_grid / k] = Complex64::new(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    x
}
