//! Signal model: atomic measures on the torus, their low-frequency Fourier
//! samples, wrap-around separation, and the total-variation norm.
//!
//! Locations are always stored as reals in `[0, 1)` (never as grid indices),
//! so continuous and discrete problems share the same types. Fourier
//! coefficients are stored in increasing `k` order, `k = -fc..=fc`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;

/// Support points of a measure, in one or two dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Locations {
    OneD(Vec<f64>),
    TwoD(Vec<[f64; 2]>),
}

impl Locations {
    pub fn dim(&self) -> usize {
        match self {
            Locations::OneD(_) => 1,
            Locations::TwoD(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Locations::OneD(v) => v.len(),
            Locations::TwoD(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn min_separation(&self) -> Result<f64> {
        match self {
            Locations::OneD(v) => min_separation(v),
            Locations::TwoD(v) => min_separation_2d(v),
        }
    }
}

/// A finite weighted sum of Dirac masses, `x = sum_j a_j delta_{t_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    locations: Locations,
    amplitudes: Vec<Complex64>,
}

fn check_coord(c: f64) -> Result<()> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::InvalidMeasure(format!(
            "coordinate {c} outside [0, 1)"
        )));
    }
    Ok(())
}

impl AtomicMeasure {
    pub fn new(locations: Locations, amplitudes: Vec<Complex64>) -> Result<Self> {
        if locations.len() != amplitudes.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} locations but {} amplitudes",
                locations.len(),
                amplitudes.len()
            )));
        }
        match &locations {
            Locations::OneD(ts) => {
                for &t in ts {
                    check_coord(t)?;
                }
                let mut sorted = ts.clone();
                sorted.sort_by(|a, b| a.total_cmp(b));
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::InvalidMeasure("duplicate location".into()));
                }
            }
            Locations::TwoD(rs) => {
                for r in rs {
                    check_coord(r[0])?;
                    check_coord(r[1])?;
                }
                let mut sorted = rs.clone();
                sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::InvalidMeasure("duplicate location".into()));
                }
            }
        }
        Ok(Self {
            locations,
            amplitudes,
        })
    }

    pub fn new_1d(locations: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::new(Locations::OneD(locations), amplitudes)
    }

    pub fn new_2d(locations: Vec<[f64; 2]>, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::new(Locations::TwoD(locations), amplitudes)
    }

    pub fn empty_1d() -> Self {
        Self {
            locations: Locations::OneD(Vec::new()),
            amplitudes: Vec::new(),
        }
    }

    /// Interprets a length-N grid signal as the measure with masses at `t / N`.
    /// Zero entries are dropped.
    pub fn from_grid(x: &[Complex64]) -> Self {
        let n = x.len() as f64;
        let (locs, amps): (Vec<f64>, Vec<Complex64>) = x
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, &a)| (i as f64 / n, a))
            .unzip();
        Self {
            locations: Locations::OneD(locs),
            amplitudes: amps,
        }
    }

    pub fn dim(&self) -> usize {
        self.locations.dim()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn locations(&self) -> &Locations {
        &self.locations
    }

    /// 1-D locations; panics on a 2-D measure.
    pub fn locations_1d(&self) -> &[f64] {
        match &self.locations {
            Locations::OneD(v) => v,
            Locations::TwoD(_) => panic!("locations_1d called on a 2-D measure"),
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Returns a copy with spikes ordered by (first) coordinate.
    pub fn sorted(&self) -> Self {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        match &self.locations {
            Locations::OneD(v) => idx.sort_by(|&a, &b| v[a].total_cmp(&v[b])),
            Locations::TwoD(v) => idx.sort_by(|&a, &b| {
                v[a][0].total_cmp(&v[b][0]).then(v[a][1].total_cmp(&v[b][1]))
            }),
        }
        let amplitudes = idx.iter().map(|&i| self.amplitudes[i]).collect();
        let locations = match &self.locations {
            Locations::OneD(v) => Locations::OneD(idx.iter().map(|&i| v[i]).collect()),
            Locations::TwoD(v) => Locations::TwoD(idx.iter().map(|&i| v[i]).collect()),
        };
        Self {
            locations,
            amplitudes,
        }
    }

    /// Shift all locations by `s` (mod 1). 1-D only.
    pub fn shifted(&self, s: f64) -> Self {
        let locations = match &self.locations {
            Locations::OneD(v) => Locations::OneD(v.iter().map(|&t| wrap_unit(t + s)).collect()),
            Locations::TwoD(v) => Locations::TwoD(
                v.iter()
                    .map(|r| [wrap_unit(r[0] + s), wrap_unit(r[1] + s)])
                    .collect(),
            ),
        };
        Self {
            locations,
            amplitudes: self.amplitudes.clone(),
        }
    }
}

/// A vector of low-frequency Fourier coefficients `y(k)`, `|k_i| <= fc`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    dim: usize,
    fc: usize,
    coeffs: Vec<Complex64>,
}

impl SampleVector {
    pub fn new(dim: usize, fc: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidInput(format!("dimension {dim} not supported")));
        }
        let n = 2 * fc + 1;
        let expected = n.pow(dim as u32);
        if coeffs.len() != expected {
            return Err(Error::InvalidInput(format!(
                "expected {expected} coefficients for fc = {fc}, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { dim, fc, coeffs })
    }

    pub fn zeros_1d(fc: usize) -> Self {
        Self {
            dim: 1,
            fc,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * fc + 1],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fc(&self) -> usize {
        self.fc
    }

    /// Number of samples per axis, `2fc + 1`.
    pub fn n(&self) -> usize {
        2 * self.fc + 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at frequency `k` (1-D).
    pub fn at(&self, k: i64) -> Complex64 {
        debug_assert_eq!(self.dim, 1);
        self.coeffs[(k + self.fc as i64) as usize]
    }

    /// Coefficient at frequency `(k1, k2)` (2-D).
    pub fn at_2d(&self, k1: i64, k2: i64) -> Complex64 {
        debug_assert_eq!(self.dim, 2);
        let n = self.n();
        let fc = self.fc as i64;
        self.coeffs[(k1 + fc) as usize * n + (k2 + fc) as usize]
    }

    /// Largest relative violation of `y(-k) = conj(y(k))`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let m = self.coeffs.len();
        // reversing the flattened array maps k -> -k in both layouts
        (0..m)
            .map(|i| (self.coeffs[m - 1 - i] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Fine-grid geometry of a discrete problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    n_grid: usize,
    fc: usize,
    srf: f64,
}

impl Geometry {
    pub fn new(n_grid: usize, fc: usize) -> Result<Self> {
        let n = 2 * fc + 1;
        if n_grid <= n {
            return Err(Error::NoSuperResolution {
                n_grid,
                n_samples: n,
            });
        }
        Ok(Self {
            n_grid,
            fc,
            srf: n_grid as f64 / n as f64,
        })
    }

    /// Geometry with cutoff `floor(N / (2 SRF))`, the convention used by the
    /// phase-transition experiments.
    pub fn from_srf(n_grid: usize, srf: f64) -> Result<Self> {
        let n = (n_grid as f64 / srf).round() as usize;
        Self::new(n_grid, n / 2)
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

    pub fn srf(&self) -> f64 {
        self.srf
    }

    /// Resolution wavelength `1/fc` expressed in grid units.
    pub fn lambda_c_grid(&self) -> f64 {
        self.n_grid as f64 / self.fc as f64
    }
}

/// Maps a real onto `[0, 1)`.
pub fn wrap_unit(t: f64) -> f64 {
    let r = t.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Wrap-around distance on the unit circle.
pub fn wrap_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Signed wrap-around difference `a - b` mapped to `[-1/2, 1/2)`.
pub fn wrap_diff(a: f64, b: f64) -> f64 {
    let d = (a - b + 0.5).rem_euclid(1.0) - 0.5;
    if d >= 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// Wrap-around l-infinity distance on the 2-torus.
pub fn wrap_distance_2d(a: [f64; 2], b: [f64; 2]) -> f64 {
    wrap_distance(a[0], b[0]).max(wrap_distance(a[1], b[1]))
}

/// Minimum wrap-around separation of a 1-D support. Returns `+inf` for a
/// single point.
pub fn min_separation(points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySupport);
    }
    if points.len() == 1 {
        return Ok(f64::INFINITY);
    }
    let mut sorted: Vec<f64> = points.iter().map(|&t| wrap_unit(t)).collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut best = 1.0 + sorted[0] - sorted[sorted.len() - 1];
    for w in sorted.windows(2) {
        best = best.min(w[1] - w[0]);
    }
    Ok(best.min(1.0 - best).max(0.0).min(best))
}

/// Minimum wrap-around l-infinity separation of a 2-D support.
pub fn min_separation_2d(points: &[[f64; 2]]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySupport);
    }
    if points.len() == 1 {
        return Ok(f64::INFINITY);
    }
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min(wrap_distance_2d(*a, *b));
        }
    }
    Ok(best)
}

/// Low-frequency Fourier coefficients of an atomic measure, evaluated
/// exactly by trigonometric sums.
pub fn sample_spikes(x: &AtomicMeasure, fc: usize) -> SampleVector {
    let n = 2 * fc + 1;
    match x.locations() {
        Locations::OneD(ts) => {
            let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
            for (&t, &a) in ts.iter().zip(x.amplitudes()) {
                accumulate_exponentials(&mut coeffs, fc, t, a);
            }
            SampleVector { dim: 1, fc, coeffs }
        }
        Locations::TwoD(rs) => {
            let mut coeffs = vec![Complex64::new(0.0, 0.0); n * n];
            let mut ex = vec![Complex64::new(0.0, 0.0); n];
            let mut ey = vec![Complex64::new(0.0, 0.0); n];
            for (r, &a) in rs.iter().zip(x.amplitudes()) {
                ex.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                ey.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                accumulate_exponentials(&mut ex, fc, r[0], a);
                accumulate_exponentials(&mut ey, fc, r[1], Complex64::new(1.0, 0.0));
                for (i, &u) in ex.iter().enumerate() {
                    for (j, &v) in ey.iter().enumerate() {
                        coeffs[i * n + j] += u * v;
                    }
                }
            }
            SampleVector { dim: 2, fc, coeffs }
        }
    }
}

/// Adds `a e^{-i 2 pi k t}` for `k = -fc..=fc` into `out`.
fn accumulate_exponentials(out: &mut [Complex64], fc: usize, t: f64, a: Complex64) {
    for (i, o) in out.iter_mut().enumerate() {
        let k = i as f64 - fc as f64;
        // direct evaluation keeps the error independent of |k|
        *o += a * Complex64::from_polar(1.0, -2.0 * PI * k * t);
    }
}

/// Partial DFT `y_k = sum_t x_t e^{-i 2 pi k t / N}`, `|k| <= fc`.
pub fn sample_discrete(x: &[Complex64], fc: usize) -> Result<SampleVector> {
    let n = 2 * fc + 1;
    if x.len() <= n {
        return Err(Error::NoSuperResolution {
            n_grid: x.len(),
            n_samples: n,
        });
    }
    let op = fourier::PartialDft::new(x.len(), fc);
    Ok(SampleVector {
        dim: 1,
        fc,
        coeffs: op.forward(x),
    })
}

/// Real-space curve of the low-pass projection, sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LowpassCurve {
    pub t: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl LowpassCurve {
    /// CSV with header `t,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,re,im\n");
        for (t, v) in self.t.iter().zip(&self.values) {
            s.push_str(&format!("{t:.12},{:.15e},{:.15e}\n", v.re, v.im));
        }
        s
    }
}

/// Evaluates `sum_{|k|<=fc} y(k) e^{i 2 pi k t}` at a single point.
pub fn eval_lowpass(y: &SampleVector, t: f64) -> Complex64 {
    debug_assert_eq!(y.dim(), 1);
    let fc = y.fc() as f64;
    y.coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| c * Complex64::from_polar(1.0, 2.0 * PI * (i as f64 - fc) * t))
        .sum()
}

/// Low-pass projection of the data on `grid_size` uniform points of `[0, 1)`.
pub fn lowpass_curve(y: &SampleVector, grid_size: usize) -> Result<LowpassCurve> {
    if y.dim() != 1 {
        return Err(Error::InvalidInput("low-pass curves are 1-D".into()));
    }
    if grid_size < y.n() + 1 {
        return Err(Error::InvalidInput(format!(
            "grid size {grid_size} must be at least 2fc+2 = {}",
            y.n() + 1
        )));
    }
    let t: Vec<f64> = (0..grid_size).map(|i| i as f64 / grid_size as f64).collect();
    let values = fourier::eval_trig_poly_grid(y.coeffs(), y.fc(), grid_size);
    Ok(LowpassCurve { t, values })
}

/// Low-pass projection `P_n x` of an atomic measure sampled on a uniform grid.
pub fn lowpass_project(x: &AtomicMeasure, fc: usize, grid_size: usize) -> Result<LowpassCurve> {
    lowpass_curve(&sample_spikes(x, fc), grid_size)
}

/// Low-pass projection of a length-N grid signal (masses at `t / N`).
pub fn lowpass_project_discrete(
    x: &[Complex64],
    fc: usize,
    grid_size: usize,
) -> Result<LowpassCurve> {
    lowpass_curve(&sample_discrete(x, fc)?, grid_size)
}

/// Total-variation norm of an atomic measure: the l1 norm of its amplitudes.
pub fn tv_norm(x: &AtomicMeasure) -> f64 {
    x.amplitudes().iter().map(|a| a.norm()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn separation_examples() {
        assert!((min_separation(&[0.0, 0.75]).unwrap() - 0.25).abs() < 1e-15);
        assert!((min_separation(&[0.1, 0.5, 0.9]).unwrap() - 0.2).abs() < 1e-12);
        let d = min_separation_2d(&[[0.0, 0.0], [0.3, 0.1]]).unwrap();
        assert!((d - 0.3).abs() < 1e-15);
        assert_eq!(min_separation(&[0.3]).unwrap(), f64::INFINITY);
        assert_eq!(min_separation(&[]), Err(Error::EmptySupport));
    }

    #[test]
    fn sample_single_spike_at_origin() {
        let x = AtomicMeasure::new_1d(vec![0.0], vec![c(1.0, 0.0)]).unwrap();
        let y = sample_spikes(&x, 2);
        assert_eq!(y.coeffs().len(), 5);
        for v in y.coeffs() {
            assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn sample_single_spike_phase() {
        let a = c(0.3, -1.2);
        let t0 = 0.37;
        let x = AtomicMeasure::new_1d(vec![t0], vec![a]).unwrap();
        let y = sample_spikes(&x, 6);
        for k in -6..=6_i64 {
            let expect = a * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * t0);
            assert!((y.at(k) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn cancelling_amplitudes_at_dc() {
        let x = AtomicMeasure::new_1d(vec![0.2, 0.7], vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let y = sample_spikes(&x, 1);
        assert!(y.at(0).norm() < 1e-15);
    }

    #[test]
    fn discrete_sampling_examples() {
        let mut e0 = vec![c(0.0, 0.0); 32];
        e0[0] = c(1.0, 0.0);
        let y = sample_discrete(&e0, 4).unwrap();
        assert!(y.coeffs().iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-12));

        let ones = vec![c(1.0, 0.0); 32];
        let y = sample_discrete(&ones, 4).unwrap();
        assert!((y.at(0) - c(32.0, 0.0)).norm() < 1e-12);
        for k in 1..=4 {
            assert!(y.at(k).norm() < 1e-12);
            assert!(y.at(-k).norm() < 1e-12);
        }

        assert!(matches!(
            sample_discrete(&ones[..9], 4),
            Err(Error::NoSuperResolution { .. })
        ));
    }

    #[test]
    fn dirichlet_peak_and_zero() {
        let fc = 2;
        let x = AtomicMeasure::new_1d(vec![0.5], vec![c(1.0, 0.0)]).unwrap();
        let y = sample_spikes(&x, fc);
        assert!((eval_lowpass(&y, 0.5) - c(5.0, 0.0)).norm() < 1e-13);
        assert!(eval_lowpass(&y, 0.5 + 1.0 / 5.0).norm() < 1e-13);
        let curve = lowpass_project(&x, fc, 10).unwrap();
        assert!((curve.values[5] - c(5.0, 0.0)).norm() < 1e-12);
        assert!(lowpass_project(&x, fc, 5).is_err());
    }

    #[test]
    fn tv_norm_examples() {
        let x = AtomicMeasure::new_1d(
            vec![0.1, 0.2, 0.3],
            vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)],
        )
        .unwrap();
        assert!((tv_norm(&x) - 3.0).abs() < 1e-15);
        assert_eq!(tv_norm(&AtomicMeasure::empty_1d()), 0.0);
        let x = AtomicMeasure::new_1d(vec![0.4], vec![c(3.0, 4.0)]).unwrap();
        assert!((tv_norm(&x) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn measure_validation() {
        assert!(AtomicMeasure::new_1d(vec![1.0], vec![c(1.0, 0.0)]).is_err());
        assert!(AtomicMeasure::new_1d(vec![-0.1], vec![c(1.0, 0.0)]).is_err());
        assert!(AtomicMeasure::new_1d(vec![0.1, 0.1], vec![c(1.0, 0.0); 2]).is_err());
        assert!(AtomicMeasure::new_1d(vec![0.1], vec![]).is_err());
        assert!(AtomicMeasure::new_2d(vec![[0.1, 0.2], [0.1, 0.2]], vec![c(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn real_measure_is_conjugate_symmetric() {
        let x = AtomicMeasure::new_1d(vec![0.11, 0.52], vec![c(1.5, 0.0), c(-0.7, 0.0)]).unwrap();
        assert!(sample_spikes(&x, 9).conjugate_symmetry_defect() < 1e-12);
        let x2 = AtomicMeasure::new_2d(vec![[0.11, 0.3], [0.52, 0.9]], vec![c(1.5, 0.0), c(-0.7, 0.0)])
            .unwrap();
        assert!(sample_spikes(&x2, 5).conjugate_symmetry_defect() < 1e-12);
    }

    #[test]
    fn geometry_rules() {
        let g = Geometry::new(64, 8).unwrap();
        assert_eq!(g.n(), 17);
        assert!((g.srf() - 64.0 / 17.0).abs() < 1e-15);
        assert!(Geometry::new(17, 8).is_err());
    }

    #[test]
    fn wrap_helpers() {
        assert!((wrap_distance(0.05, 0.95) - 0.1).abs() < 1e-15);
        assert!((wrap_diff(0.05, 0.95) - 0.1).abs() < 1e-15);
        assert!((wrap_diff(0.95, 0.05) + 0.1).abs() < 1e-15);
        assert_eq!(wrap_unit(-0.25), 0.75);
    }
}
