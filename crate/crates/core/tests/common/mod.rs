#![allow(dead_code)]

use nalgebra::DVector;
use num_complex::Complex64;
use superres_core::discrete::restricted_matrix;

/// Exhaustive sparse oracle for basis pursuit: every support of size at most
/// `max_size` is fitted by least squares, exact fits are kept, and the one with
/// the smallest l1 norm wins. Sizes are scanned in increasing order so a tie
/// goes to the sparser support.
pub fn exhaustive_bp(y: &[Complex64], n_grid: usize, fc: usize, max_size: usize) -> (Vec<usize>, Vec<Complex64>, f64) {
    let b = DVector::from_column_slice(y);
    let mut best: (Vec<usize>, Vec<Complex64>, f64) = (vec![], vec![], f64::INFINITY);
    let mut support = Vec::new();
    fn rec(
        start: usize,
        support: &mut Vec<usize>,
        n_grid: usize,
        fc: usize,
        max_size: usize,
        b: &DVector<Complex64>,
        best: &mut (Vec<usize>, Vec<Complex64>, f64),
    ) {
        if support.len() == max_size {
            let a = restricted_matrix(n_grid, fc, support);
            let svd = a.clone().svd(true, true);
            if let Ok(x) = svd.solve(b, 1e-12) {
                let r = (&a * &x - b).norm();
                if r <= 1e-9 * b.norm() {
                    let l1: f64 = x.iter().map(|v| v.norm()).sum();
                    if l1 < best.2 - 1e-9 {
                        *best = (support.clone(), x.iter().copied().collect(), l1);
                    }
                }
            }
        }
        if support.len() == max_size {
            return;
        }
        for j in start..n_grid {
            support.push(j);
            rec(j + 1, support, n_grid, fc, max_size, b, best);
            support.pop();
        }
    }
    for size in 1..=max_size {
        rec(0, &mut support, n_grid, fc, size, &b, &mut best);
    }
    best
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
