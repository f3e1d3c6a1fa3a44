//! Dual certificates: low-frequency trigonometric polynomials that interpolate
//! a sign pattern on a support and stay below one in modulus elsewhere.
//!
//! A certificate is a combination of shifted copies of the squared-Fejér
//! kernel and of its derivative(s); the coefficients solve a block linear
//! system that pins the value and the gradient at every support point.
//! Verification is numerical: a dense grid plus local refinement off the
//! support, and a curvature check close to it.

use std::f64::consts::PI;

use nalgebra::{DMatrix, FullPivLU};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::kernel::KernelSpec;
use crate::model::{wrap_diff, wrap_distance, wrap_distance_2d, Locations, LowpassCurve};

/// Systems whose condition estimate exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Radius (in units of `1/fc`) of the near region checked for curvature, 1-D.
pub const NEAR_RADIUS_1D: f64 = 0.1649;

/// Radius (in units of `1/fc`) of the near region checked for curvature, 2-D.
pub const NEAR_RADIUS_2D: f64 = 0.2447;

/// Radius (in units of `1/fc`) of the balls excluded from the grid scan.
pub const EXCLUSION_RADIUS: f64 = 1e-3;

/// Required gap below one for the certified off-support maximum.
pub const FEASIBILITY_MARGIN: f64 = 1e-9;

/// Curvature sample points per support point.
const CURVATURE_POINTS: usize = 32;

/// Grid local maxima refined per verification.
const REFINE_CANDIDATES: usize = 16;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Interpolation matrices of a 1-D support, `(D_l)_{jk} = K^(l)(t_j - t_k)`.
#[derive(Debug, Clone)]
pub struct InterpolationSystem {
    pub d0: DMatrix<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    k2_zero: f64,
}

/// Infinity-norm diagnostics of the interpolation matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemDiagnostics {
    /// `||I - D0||_inf`.
    pub d0_defect: f64,
    /// `||D1||_inf`.
    pub d1_norm: f64,
    /// `||D2 - K''(0) I||_inf`: the off-diagonal mass of `D2`.
    pub d2_defect: f64,
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl InterpolationSystem {
    pub fn new(support: &[f64], spec: &KernelSpec) -> Self {
        let m = support.len();
        let mut d0 = DMatrix::zeros(m, m);
        let mut d1 = DMatrix::zeros(m, m);
        let mut d2 = DMatrix::zeros(m, m);
        for j in 0..m {
            for k in 0..m {
                let v = spec.eval_all(support[j] - support[k]);
                d0[(j, k)] = v[0];
                d1[(j, k)] = v[1];
                d2[(j, k)] = v[2];
            }
        }
        Self {
            d0,
            d1,
            d2,
            k2_zero: spec.k2_at_zero(),
        }
    }

    pub fn diagnostics(&self) -> SystemDiagnostics {
        let m = self.d0.nrows();
        let id = DMatrix::<f64>::identity(m, m);
        SystemDiagnostics {
            d0_defect: inf_norm(&(&id - &self.d0)),
            d1_norm: inf_norm(&self.d1),
            d2_defect: inf_norm(&(&self.d2 - &id * self.k2_zero)),
        }
    }

    /// Schur complement `D0 - D1 D2^{-1} D1`, when `D2` is invertible.
    pub fn schur_complement(&self) -> Option<DMatrix<f64>> {
        let inv = self.d2.clone().try_inverse()?;
        Some(&self.d0 - &self.d1 * inv * &self.d1)
    }
}

/// An interpolating dual polynomial in one or two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    spec: KernelSpec,
    support: Locations,
    pattern: Vec<Complex64>,
    alpha: Vec<Complex64>,
    beta: Vec<Complex64>,
    beta2: Vec<Complex64>,
    condition: f64,
    interp_residual: f64,
    deriv_residual: f64,
}

impl Certificate {
    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn support(&self) -> &Locations {
        &self.support
    }

    pub fn pattern(&self) -> &[Complex64] {
        &self.pattern
    }

    /// Coefficients of the kernel copies.
    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    /// Coefficients of the derivative copies (x-derivative in 2-D).
    pub fn beta(&self) -> &[Complex64] {
        &self.beta
    }

    /// Coefficients of the y-derivative copies; empty in 1-D.
    pub fn beta2(&self) -> &[Complex64] {
        &self.beta2
    }

    /// Condition estimate of the (rescaled) interpolation system.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// `max_j |q(t_j) - v_j|`.
    pub fn interp_residual(&self) -> f64 {
        self.interp_residual
    }

    /// `max_j |grad q(t_j)|`.
    pub fn deriv_residual(&self) -> f64 {
        self.deriv_residual
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn beta_max(&self) -> f64 {
        self.beta
            .iter()
            .chain(&self.beta2)
            .map(|a| a.norm())
            .fold(0.0, f64::max)
    }

    fn support_1d(&self) -> &[f64] {
        match &self.support {
            Locations::OneD(v) => v,
            Locations::TwoD(_) => panic!("1-D operation on a 2-D certificate"),
        }
    }

    fn support_2d(&self) -> &[[f64; 2]] {
        match &self.support {
            Locations::TwoD(v) => v,
            Locations::OneD(_) => panic!("2-D operation on a 1-D certificate"),
        }
    }

    /// `q, q', q''` at `t` (1-D).
    pub fn eval_1d_all(&self, t: f64) -> [Complex64; 3] {
        let mut out = [ZERO; 3];
        for ((&tj, &a), &b) in self.support_1d().iter().zip(&self.alpha).zip(&self.beta) {
            let k = self.spec.eval_all(t - tj);
            out[0] += a * k[0] + b * k[1];
            out[1] += a * k[1] + b * k[2];
            out[2] += a * k[2] + b * k[3];
        }
        out
    }

    /// Value, gradient and Hessian `[q, qx, qy, qxx, qxy, qyy]` at `r` (2-D).
    pub fn eval_2d_all(&self, r: [f64; 2]) -> [Complex64; 6] {
        let mut out = [ZERO; 6];
        for (j, rj) in self.support_2d().iter().enumerate() {
            let kx = self.spec.eval_all(r[0] - rj[0]);
            let ky = self.spec.eval_all(r[1] - rj[1]);
            let (a, b1, b2) = (self.alpha[j], self.beta[j], self.beta2[j]);
            // q = a Kx Ky + b1 Kx' Ky + b2 Kx Ky'
            out[0] += a * kx[0] * ky[0] + b1 * kx[1] * ky[0] + b2 * kx[0] * ky[1];
            out[1] += a * kx[1] * ky[0] + b1 * kx[2] * ky[0] + b2 * kx[1] * ky[1];
            out[2] += a * kx[0] * ky[1] + b1 * kx[1] * ky[1] + b2 * kx[0] * ky[2];
            out[3] += a * kx[2] * ky[0] + b1 * kx[3] * ky[0] + b2 * kx[2] * ky[1];
            out[4] += a * kx[1] * ky[1] + b1 * kx[2] * ky[1] + b2 * kx[1] * ky[2];
            out[5] += a * kx[0] * ky[2] + b1 * kx[1] * ky[2] + b2 * kx[0] * ky[3];
        }
        out
    }

    /// Fourier coefficients `c_k`, `|k| <= fc`, with `q(t) = sum c_k e^{i 2 pi k t}`.
    /// 1-D only; 2-D certificates use [`Certificate::fourier_coeffs_2d`].
    pub fn fourier_coeffs(&self) -> Vec<Complex64> {
        let fc = self.spec.fc() as f64;
        let khat = self.spec.fourier_coeffs();
        let mut c = vec![ZERO; khat.len()];
        for ((&tj, &a), &b) in self.support_1d().iter().zip(&self.alpha).zip(&self.beta) {
            for (i, ci) in c.iter_mut().enumerate() {
                let k = i as f64 - fc;
                let w = Complex64::new(0.0, 2.0 * PI * k);
                *ci += (a + b * w) * khat[i] * Complex64::from_polar(1.0, -2.0 * PI * k * tj);
            }
        }
        c
    }

    /// 2-D Fourier coefficients, row-major in `(k1, k2)`, each in `-fc..=fc`.
    pub fn fourier_coeffs_2d(&self) -> Vec<Complex64> {
        let n = 2 * self.spec.fc() + 1;
        let (ex, ey) = self.axis_factors();
        let mut c = vec![ZERO; n * n];
        for j in 0..self.alpha.len() {
            let (a, b1, b2) = (self.alpha[j], self.beta[j], self.beta2[j]);
            for k1 in 0..n {
                let (x0, x1) = (ex[j][k1], ex[j][k1] * self.deriv_factor(k1));
                for k2 in 0..n {
                    let (y0, y1) = (ey[j][k2], ey[j][k2] * self.deriv_factor(k2));
                    c[k1 * n + k2] += a * x0 * y0 + b1 * x1 * y0 + b2 * x0 * y1;
                }
            }
        }
        c
    }

    fn deriv_factor(&self, idx: usize) -> Complex64 {
        Complex64::new(0.0, 2.0 * PI * (idx as f64 - self.spec.fc() as f64))
    }

    /// Per spike, `Khat_k e^{-i 2 pi k x_j}` along each axis.
    fn axis_factors(&self) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
        let fc = self.spec.fc() as f64;
        let khat = self.spec.fourier_coeffs();
        let fac = |u: f64| -> Vec<Complex64> {
            khat.iter()
                .enumerate()
                .map(|(i, &kh)| kh * Complex64::from_polar(1.0, -2.0 * PI * (i as f64 - fc) * u))
                .collect()
        };
        let rs = self.support_2d();
        (
            rs.iter().map(|r| fac(r[0])).collect(),
            rs.iter().map(|r| fac(r[1])).collect(),
        )
    }
}

fn check_pattern(v: &[Complex64]) -> Result<()> {
    for (j, x) in v.iter().enumerate() {
        if (x.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "pattern entry {j} has modulus {} (must be 1)",
                x.norm()
            )));
        }
    }
    Ok(())
}

/// Solves the real system `a x = b` for a complex right-hand side, with one
/// step of iterative refinement. Returns the solution and a condition estimate.
fn solve_real_system(a: &DMatrix<f64>, rhs: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let sv = a.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SeparationTooSmall { condition });
    }
    let m = rhs.len();
    let b = DMatrix::from_fn(m, 2, |i, c| if c == 0 { rhs[i].re } else { rhs[i].im });
    let lu = FullPivLU::new(a.clone());
    let mut x = lu
        .solve(&b)
        .ok_or(Error::SeparationTooSmall { condition })?;
    let r = &b - a * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    Ok(((0..m).map(|i| Complex64::new(x[(i, 0)], x[(i, 1)])).collect(), condition))
}

/// Builds the 1-D certificate interpolating `pattern` on `support` with zero
/// derivative there.
pub fn build_certificate(support: &[f64], pattern: &[Complex64], spec: &KernelSpec) -> Result<Certificate> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    if support.len() != pattern.len() {
        return Err(Error::InvalidInput("support and pattern lengths differ".into()));
    }
    check_pattern(pattern)?;
    let m = support.len();
    let fc = spec.fc() as f64;
    let sys = InterpolationSystem::new(support, spec);
    // derivative unknowns and equations rescaled by 1/fc so all blocks are O(1)
    let a = DMatrix::from_fn(2 * m, 2 * m, |i, j| match (i < m, j < m) {
        (true, true) => sys.d0[(i, j)],
        (true, false) => sys.d1[(i, j - m)] / fc,
        (false, true) => sys.d1[(i - m, j)] / fc,
        (false, false) => sys.d2[(i - m, j - m)] / (fc * fc),
    });
    let mut rhs = pattern.to_vec();
    rhs.resize(2 * m, ZERO);
    let (x, condition) = solve_real_system(&a, &rhs)?;
    let alpha = x[..m].to_vec();
    let beta = x[m..].iter().map(|b| b / fc).collect();
    let mut cert = Certificate {
        spec: *spec,
        support: Locations::OneD(support.to_vec()),
        pattern: pattern.to_vec(),
        alpha,
        beta,
        beta2: Vec::new(),
        condition,
        interp_residual: 0.0,
        deriv_residual: 0.0,
    };
    let (mut r0, mut r1) = (0.0_f64, 0.0_f64);
    for (&t, &v) in support.iter().zip(pattern) {
        let q = cert.eval_1d_all(t);
        r0 = r0.max((q[0] - v).norm());
        r1 = r1.max(q[1].norm());
    }
    cert.interp_residual = r0;
    cert.deriv_residual = r1;
    Ok(cert)
}

/// Builds the 2-D certificate: value `pattern` and zero gradient at every
/// support point. Cutoffs below 512 are outside the regime where the
/// construction is proven to work and produce a warning.
pub fn build_certificate_2d(
    support: &[[f64; 2]],
    pattern: &[Complex64],
    spec: &KernelSpec,
) -> Result<Certificate> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    if support.len() != pattern.len() {
        return Err(Error::InvalidInput("support and pattern lengths differ".into()));
    }
    check_pattern(pattern)?;
    if spec.fc() < 512 {
        log::warn!(
            "2-D certificate with fc = {} < 512: outside the proven regime",
            spec.fc()
        );
    }
    let m = support.len();
    let fc = spec.fc() as f64;
    let mut kx = Vec::with_capacity(m * m);
    let mut ky = Vec::with_capacity(m * m);
    for j in 0..m {
        for k in 0..m {
            kx.push(spec.eval_all(support[j][0] - support[k][0]));
            ky.push(spec.eval_all(support[j][1] - support[k][1]));
        }
    }
    // block (p, q): row condition p in {value, d/dx, d/dy}, unknown q in
    // {alpha, beta_x, beta_y}; orders add along each axis
    let orders = [(0, 0), (1, 0), (0, 1)];
    let a = DMatrix::from_fn(3 * m, 3 * m, |i, j| {
        let (p, jr) = (i / m, i % m);
        let (q, kc) = (j / m, j % m);
        let ox = orders[p].0 + orders[q].0;
        let oy = orders[p].1 + orders[q].1;
        let scale = fc.powi((ox + oy) as i32);
        kx[jr * m + kc][ox] * ky[jr * m + kc][oy] / scale
    });
    let mut rhs = pattern.to_vec();
    rhs.resize(3 * m, ZERO);
    let (x, condition) = solve_real_system(&a, &rhs)?;
    let mut cert = Certificate {
        spec: *spec,
        support: Locations::TwoD(support.to_vec()),
        pattern: pattern.to_vec(),
        alpha: x[..m].to_vec(),
        beta: x[m..2 * m].iter().map(|b| b / fc).collect(),
        beta2: x[2 * m..].iter().map(|b| b / fc).collect(),
        condition,
        interp_residual: 0.0,
        deriv_residual: 0.0,
    };
    let (mut r0, mut r1) = (0.0_f64, 0.0_f64);
    for (&r, &v) in support.iter().zip(pattern) {
        let q = cert.eval_2d_all(r);
        r0 = r0.max((q[0] - v).norm());
        r1 = r1.max(q[1].norm().hypot(q[2].norm()));
    }
    cert.interp_residual = r0;
    cert.deriv_residual = r1;
    Ok(cert)
}

/// `q^(order)(t)` for `order <= 2` (1-D).
pub fn eval_certificate(cert: &Certificate, t: f64, order: usize) -> Result<Complex64> {
    if cert.dim() != 1 {
        return Err(Error::InvalidInput("1-D evaluation of a 2-D certificate".into()));
    }
    if order > 2 {
        return Err(Error::Domain(format!("derivative order {order} > 2")));
    }
    Ok(cert.eval_1d_all(t)[order])
}

/// `q` (orders (0,0)) or its partial derivatives at `r`, total order <= 2.
pub fn eval_certificate_2d(cert: &Certificate, r: [f64; 2], orders: (usize, usize)) -> Result<Complex64> {
    if cert.dim() != 2 {
        return Err(Error::InvalidInput("2-D evaluation of a 1-D certificate".into()));
    }
    let v = cert.eval_2d_all(r);
    Ok(match orders {
        (0, 0) => v[0],
        (1, 0) => v[1],
        (0, 1) => v[2],
        (2, 0) => v[3],
        (1, 1) => v[4],
        (0, 2) => v[5],
        _ => return Err(Error::Domain("total derivative order exceeds 2".into())),
    })
}

/// Exact Fourier coefficients of a 1-D certificate.
pub fn certificate_fourier_coeffs(cert: &Certificate) -> Result<Vec<Complex64>> {
    if cert.dim() != 1 {
        return Err(Error::InvalidInput("use fourier_coeffs_2d for 2-D certificates".into()));
    }
    Ok(cert.fourier_coeffs())
}

/// Outcome of a certificate verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub dim: usize,
    pub fc: usize,
    pub support_size: usize,
    pub feasible: bool,
    /// Largest `|q|` found outside the exclusion balls (grid plus refinement).
    pub max_offgrid_modulus: f64,
    /// Where that maximum was found (first coordinate only in 1-D).
    pub argmax: Vec<f64>,
    /// Largest `|q|` on the grid alone.
    pub grid_max_modulus: f64,
    pub alpha_max: f64,
    pub beta_max: f64,
    /// `min_j Re(conj(v_j) alpha_j)`.
    pub alpha_aligned_min: f64,
    /// `max_j |Im(conj(v_j) alpha_j)|`.
    pub alpha_cross_max: f64,
    /// `1 - max_offgrid_modulus`.
    pub far_margin: f64,
    /// Largest curvature of `|q|` (1-D) or largest Hessian eigenvalue of `|q|`
    /// (2-D) over the near-region samples, in units of `fc^2`. Negative means
    /// strictly concave.
    pub near_curvature_max: f64,
    pub concave_near_support: bool,
    pub grid_per_lambda_c: usize,
    pub grid_points: usize,
    pub condition: f64,
    pub interp_residual: f64,
    pub deriv_residual: f64,
}

fn alignment_stats(cert: &Certificate) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut cross = 0.0_f64;
    for (a, v) in cert.alpha.iter().zip(&cert.pattern) {
        let r = v.conj() * a;
        lo = lo.min(r.re);
        cross = cross.max(r.im.abs());
    }
    (lo, cross)
}

/// Second derivative of `|q|` from `q, q', q''`.
fn modulus_curvature(q: [Complex64; 3]) -> f64 {
    let m = q[0].norm();
    let rp = (q[0].conj() * q[1]).re;
    ((q[0].conj() * q[2]).re + q[1].norm_sqr()) / m - rp * rp / (m * m * m)
}

/// Largest eigenvalue of the Hessian of `|q|` from value, gradient, Hessian.
fn modulus_hessian_max_eig(v: [Complex64; 6]) -> f64 {
    let m = v[0].norm();
    let g = [(v[0].conj() * v[1]).re, (v[0].conj() * v[2]).re];
    let d = [v[1], v[2]];
    let h2 = [[v[3], v[4]], [v[4], v[5]]];
    let mut h = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            h[a][b] = ((v[0].conj() * h2[a][b]).re + (d[a].conj() * d[b]).re) / m
                - g[a] * g[b] / (m * m * m);
        }
    }
    let tr = h[0][0] + h[1][1];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    tr / 2.0 + disc
}

/// Maximizes `h` on `[a, b]` by golden-section search.
fn golden_max(mut a: f64, mut b: f64, h: impl Fn(f64) -> f64) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = h(x1);
    let mut f2 = h(x2);
    for _ in 0..200 {
        if b - a < 1e-15 {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = h(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = h(x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Verifies a 1-D certificate: `|q| < 1` away from the support (grid of
/// `grid_per_lambda_c * fc` points, optional local refinement) and strict
/// concavity of `|q|` in the near region of each support point.
pub fn verify_certificate(cert: &Certificate, grid_per_lambda_c: usize, refine: bool) -> Result<CertReport> {
    if cert.dim() != 1 {
        return Err(Error::InvalidInput("use verify_certificate_2d for 2-D certificates".into()));
    }
    if grid_per_lambda_c < 64 {
        return Err(Error::InvalidInput(format!(
            "grid density {grid_per_lambda_c} per wavelength is below the minimum of 64"
        )));
    }
    let fc = cert.spec.fc();
    let lc = 1.0 / fc as f64;
    let support = cert.support_1d();
    let m_grid = grid_per_lambda_c * fc;
    let values = fourier::eval_trig_poly_grid(&cert.fourier_coeffs(), fc, m_grid);
    let excl = EXCLUSION_RADIUS * lc;
    let excluded = |t: f64| support.iter().any(|&s| wrap_distance(t, s) <= excl);
    let modulus: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let grid_t = |i: usize| i as f64 / m_grid as f64;

    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for i in 0..m_grid {
        let t = grid_t(i);
        if excluded(t) {
            continue;
        }
        let v = modulus[i];
        if v > best.0 {
            best = (v, t);
        }
        let prev = modulus[(i + m_grid - 1) % m_grid];
        let next = modulus[(i + 1) % m_grid];
        if v >= prev && v >= next {
            candidates.push((v, i));
        }
    }
    let grid_max = best.0;
    if refine {
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let h = 1.0 / m_grid as f64;
        for &(_, i) in candidates.iter().take(REFINE_CANDIDATES) {
            let t0 = grid_t(i);
            let (mut a, mut b) = (t0 - h, t0 + h);
            // keep the search interval outside the exclusion balls
            for &s in support {
                let d = wrap_diff(s, t0);
                if d.abs() <= h + excl {
                    if d > 0.0 {
                        b = b.min(t0 + d - excl);
                    } else {
                        a = a.max(t0 + d + excl);
                    }
                }
            }
            if b <= a {
                continue;
            }
            let (t, v) = golden_max(a, b, |t| cert.eval_1d_all(t)[0].norm());
            if v > best.0 {
                best = (v, crate::model::wrap_unit(t));
            }
        }
    }

    let mut curv = f64::NEG_INFINITY;
    let r = NEAR_RADIUS_1D * lc;
    let half = CURVATURE_POINTS / 2;
    for &s in support {
        for side in [-1.0, 1.0] {
            for p in 1..=half {
                let t = s + side * r * p as f64 / half as f64;
                curv = curv.max(modulus_curvature(cert.eval_1d_all(t)));
            }
        }
    }
    let curv = curv / (fc * fc) as f64;
    let concave = curv < 0.0;
    let (aligned, cross) = alignment_stats(cert);
    Ok(CertReport {
        dim: 1,
        fc,
        support_size: support.len(),
        feasible: concave && best.0 < 1.0 - FEASIBILITY_MARGIN,
        max_offgrid_modulus: best.0,
        argmax: vec![best.1],
        grid_max_modulus: grid_max,
        alpha_max: cert.alpha_max(),
        beta_max: cert.beta_max(),
        alpha_aligned_min: aligned,
        alpha_cross_max: cross,
        far_margin: 1.0 - best.0,
        near_curvature_max: curv,
        concave_near_support: concave,
        grid_per_lambda_c,
        grid_points: m_grid,
        condition: cert.condition,
        interp_residual: cert.interp_residual,
        deriv_residual: cert.deriv_residual,
    })
}

/// `q` on a uniform grid of `points` samples of `[0, 1)` (1-D).
pub fn certificate_curve(cert: &Certificate, points: usize) -> Result<LowpassCurve> {
    if cert.dim() != 1 {
        return Err(Error::InvalidInput("curves are 1-D".into()));
    }
    let fc = cert.spec.fc();
    Ok(LowpassCurve {
        t: (0..points).map(|i| i as f64 / points as f64).collect(),
        values: fourier::eval_trig_poly_grid(&cert.fourier_coeffs(), fc, points),
    })
}

/// Verifies a 2-D certificate on a `(grid_per_lambda_c * fc)^2` grid. Each
/// grid row is a 1-D trigonometric polynomial in `y` whose coefficients are
/// assembled from the kernel weights at that `x`, then evaluated by FFT; rows
/// are processed in parallel and reduced in row order.
pub fn verify_certificate_2d(cert: &Certificate, grid_per_lambda_c: usize) -> Result<CertReport> {
    if cert.dim() != 2 {
        return Err(Error::InvalidInput("use verify_certificate for 1-D certificates".into()));
    }
    if grid_per_lambda_c < 64 {
        return Err(Error::InvalidInput(format!(
            "grid density {grid_per_lambda_c} per wavelength is below the minimum of 64"
        )));
    }
    let spec = cert.spec;
    let fc = spec.fc();
    let n = 2 * fc + 1;
    let lc = 1.0 / fc as f64;
    let support = cert.support_2d();
    let m_grid = grid_per_lambda_c * fc;
    let excl = EXCLUSION_RADIUS * lc;
    let (_, ey) = cert.axis_factors();
    let ey1: Vec<Vec<Complex64>> = ey
        .iter()
        .map(|row| row.iter().enumerate().map(|(k, &v)| v * cert.deriv_factor(k)).collect())
        .collect();
    let fft = FftPlanner::new().plan_fft_inverse(m_grid);
    let fcl = fc as i64;

    let row_max = |i: usize| -> (f64, usize, f64, usize) {
        let x = i as f64 / m_grid as f64;
        let mut coeffs = vec![ZERO; n];
        for (j, rj) in support.iter().enumerate() {
            let kx = spec.eval_all(x - rj[0]);
            let w0 = cert.alpha[j] * kx[0] + cert.beta[j] * kx[1];
            let w1 = cert.beta2[j] * kx[0];
            for k in 0..n {
                coeffs[k] += w0 * ey[j][k] + w1 * ey1[j][k];
            }
        }
        let mut buf = vec![ZERO; m_grid];
        for (k, &c) in coeffs.iter().enumerate() {
            buf[(k as i64 - fcl).rem_euclid(m_grid as i64) as usize] += c;
        }
        fft.process(&mut buf);
        let near_x: Vec<f64> = support
            .iter()
            .filter(|r| wrap_distance(r[0], x) <= excl)
            .map(|r| r[1])
            .collect();
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (mi, v) in buf.iter().enumerate() {
            let y = mi as f64 / m_grid as f64;
            if near_x.iter().any(|&ys| wrap_distance(ys, y) <= excl) {
                continue;
            }
            let a = v.norm();
            if a > best.0 {
                best = (a, mi);
            }
        }
        (best.0, best.1, x, i)
    };
    let rows: Vec<(f64, usize, f64, usize)> = (0..m_grid).into_par_iter().map(row_max).collect();
    let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
    for &(v, mi, x, _) in &rows {
        if v > best.0 {
            best = (v, [x, mi as f64 / m_grid as f64]);
        }
    }
    let grid_max = best.0;

    // refine the best rows' maxima by alternating golden-section searches
    let mut order: Vec<usize> = (0..m_grid).collect();
    order.sort_by(|&a, &b| rows[b].0.total_cmp(&rows[a].0).then(a.cmp(&b)));
    let h = 1.0 / m_grid as f64;
    let mut seen: Vec<[f64; 2]> = Vec::new();
    for &i in order.iter().take(4 * REFINE_CANDIDATES) {
        let p0 = [rows[i].2, rows[i].1 as f64 / m_grid as f64];
        if seen.iter().any(|s| wrap_distance_2d(*s, p0) < 4.0 * h) {
            continue;
        }
        seen.push(p0);
        if seen.len() > REFINE_CANDIDATES {
            break;
        }
        let mut p = p0;
        let allowed = |q: [f64; 2]| support.iter().all(|s| wrap_distance_2d(*s, q) > excl);
        for _ in 0..6 {
            let (x, _) = golden_max(p[0] - h, p[0] + h, |x| {
                if allowed([x, p[1]]) {
                    cert.eval_2d_all([x, p[1]])[0].norm()
                } else {
                    f64::NEG_INFINITY
                }
            });
            p[0] = x;
            let (y, _) = golden_max(p[1] - h, p[1] + h, |y| {
                if allowed([p[0], y]) {
                    cert.eval_2d_all([p[0], y])[0].norm()
                } else {
                    f64::NEG_INFINITY
                }
            });
            p[1] = y;
        }
        if allowed(p) {
            let v = cert.eval_2d_all(p)[0].norm();
            if v > best.0 {
                best = (v, [crate::model::wrap_unit(p[0]), crate::model::wrap_unit(p[1])]);
            }
        }
    }

    let mut curv = f64::NEG_INFINITY;
    let r = NEAR_RADIUS_2D * lc;
    let rings = 4;
    let dirs = CURVATURE_POINTS / rings;
    for s in support {
        for ring in 1..=rings {
            let rho = r * ring as f64 / rings as f64;
            for d in 0..dirs {
                let th = 2.0 * PI * (d as f64 + 0.5 * (ring % 2) as f64) / dirs as f64;
                let (sn, cs) = th.sin_cos();
                let scale = rho / cs.abs().max(sn.abs());
                let p = [s[0] + cs * scale, s[1] + sn * scale];
                curv = curv.max(modulus_hessian_max_eig(cert.eval_2d_all(p)));
            }
        }
    }
    let curv = curv / (fc * fc) as f64;
    let concave = curv < 0.0;
    let (aligned, cross) = alignment_stats(cert);
    Ok(CertReport {
        dim: 2,
        fc,
        support_size: support.len(),
        feasible: concave && best.0 < 1.0 - FEASIBILITY_MARGIN,
        max_offgrid_modulus: best.0,
        argmax: best.1.to_vec(),
        grid_max_modulus: grid_max,
        alpha_max: cert.alpha_max(),
        beta_max: cert.beta_max(),
        alpha_aligned_min: aligned,
        alpha_cross_max: cross,
        far_margin: 1.0 - best.0,
        near_curvature_max: curv,
        concave_near_support: concave,
        grid_per_lambda_c,
        grid_points: m_grid * m_grid,
        condition: cert.condition,
        interp_residual: cert.interp_residual,
        deriv_residual: cert.deriv_residual,
    })
}
