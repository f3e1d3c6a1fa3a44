//! Total-variation recovery through the semidefinite dual.
//!
//! The dual problem maximizes `Re <y, c>` over coefficient vectors `c` whose
//! trigonometric polynomial `(F* c)(t) = sum_k c_k e^{i 2 pi k t}` is bounded
//! by one in modulus. The bound is expressed by a positive semidefinite
//! matrix `[[Q, c], [c*, 1]]` whose upper-left block has unit trace and
//! vanishing off-diagonal sums. This module solves that program with ADMM
//! (alternating projections onto the PSD cone and the affine constraint set),
//! then locates the support as the points where `|F* c| = 1` and fits the
//! amplitudes by least squares.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::matching::{match_locations, MatchReport};
use crate::model::{self, wrap_distance, AtomicMeasure, Locations, SampleVector};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Grid minima of `1 - |F* c|^2` above this are not polished.
const GRID_PREFILTER: f64 = 0.5;

/// Solver and post-processing options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    /// Stopping tolerance on the relative primal and dual residuals.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial ADMM penalty.
    pub rho: f64,
    /// Over-relaxation factor in `[1, 2)`.
    pub relaxation: f64,
    /// Grid minima of `1 - |F* c|^2` below this are treated as roots.
    pub root_band: f64,
    /// Roots closer than this many wavelengths `1/fc` are merged.
    pub merge_tol: f64,
    /// Amplitudes below `amp_floor * max|y|` are pruned.
    pub amp_floor: f64,
    /// Cross-check grid roots against companion-matrix eigenvalues.
    pub companion_check: bool,
    /// Refine support, amplitudes and dual coefficients jointly by Newton
    /// iterations on the optimality conditions.
    pub polish: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 50_000,
            rho: 3.0,
            relaxation: 1.6,
            root_band: 1e-6,
            merge_tol: 1e-4,
            amp_floor: 1e-8,
            companion_check: true,
            polish: true,
        }
    }
}

/// Output of the dual solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub fc: usize,
    /// Dual coefficients, increasing `k`.
    pub c: Vec<Complex64>,
    /// Upper-left block of the PSD variable.
    pub q: DMatrix<Complex64>,
    /// `Re <y, c>`.
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    /// `max |F* c|` on a `64 n` grid.
    pub max_modulus: f64,
    /// `max |1 - |F* c|^2|` on the same grid.
    pub max_vanishing: f64,
    pub degenerate: bool,
}

impl DualSolution {
    /// Smallest eigenvalue of `[[Q, c], [c*, 1]]`.
    pub fn min_eigenvalue(&self) -> f64 {
        let x = assemble(&self.q, &self.c);
        SymmetricEigen::new(x).eigenvalues.min()
    }

    /// Largest violation of the diagonal-sum conditions on `Q`.
    pub fn trace_defect(&self) -> f64 {
        let n = self.c.len();
        let mut worst = 0.0_f64;
        for j in 0..n {
            let s: Complex64 = (0..n - j).map(|i| self.q[(i, i + j)]).sum();
            let target = if j == 0 { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
        worst
    }
}

fn assemble(q: &DMatrix<Complex64>, c: &[Complex64]) -> DMatrix<Complex64> {
    let n = c.len();
    let mut x = DMatrix::zeros(n + 1, n + 1);
    x.view_mut((0, 0), (n, n)).copy_from(q);
    for (m, &v) in c.iter().enumerate() {
        x[(m, n)] = v;
        x[(n, m)] = v.conj();
    }
    x[(n, n)] = Complex64::new(1.0, 0.0);
    x
}

/// Projection onto `{X : sum_i Q_{i,i+j} = delta_j, X_{n,n} = 1}`; the last
/// column (the dual coefficients) is unconstrained.
fn project_affine(x: &mut DMatrix<Complex64>) {
    let n = x.nrows() - 1;
    for j in 0..n {
        let len = (n - j) as f64;
        let s: Complex64 = (0..n - j).map(|i| x[(i, i + j)]).sum();
        let target = if j == 0 { 1.0 } else { 0.0 };
        let shift = (s - target) / len;
        for i in 0..n - j {
            x[(i, i + j)] -= shift;
            if j > 0 {
                x[(i + j, i)] -= shift.conj();
            }
        }
    }
    x[(n, n)] = Complex64::new(1.0, 0.0);
}

fn project_psd(x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(x.clone());
    let n = x.nrows();
    let pos: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 0.0).collect();
    let neg: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] < 0.0).collect();
    // rebuild from whichever side has fewer eigenpairs
    let (idx, sign) = if pos.len() <= neg.len() { (&pos, 1.0) } else { (&neg, -1.0) };
    let mut v = DMatrix::<Complex64>::zeros(n, idx.len());
    for (c, &k) in idx.iter().enumerate() {
        let s = (sign * eig.eigenvalues[k]).sqrt();
        v.set_column(c, &(eig.eigenvectors.column(k) * Complex64::new(s, 0.0)));
    }
    let part = &v * v.adjoint();
    let mut z = if sign > 0.0 { part } else { x + part };
    for i in 0..n {
        z[(i, i)].im = 0.0;
        for j in 0..i {
            let a = (z[(i, j)] + z[(j, i)].conj()) * 0.5;
            z[(i, j)] = a;
            z[(j, i)] = a.conj();
        }
    }
    z
}

fn fro(x: &DMatrix<Complex64>) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves the dual semidefinite program for 1-D samples `y`.
pub fn solve_dual(y: &SampleVector, opts: &SdpOptions) -> Result<DualSolution> {
    if y.dim() != 1 {
        return Err(Error::InvalidInput("the SDP route is 1-D only".into()));
    }
    let n = y.n();
    if n < 3 {
        return Err(Error::InvalidInput("need fc >= 1".into()));
    }
    let scale = y.coeffs().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        // every feasible c is optimal; return the zero polynomial
        let c = vec![ZERO; n];
        return Ok(finish(y, c, DMatrix::identity(n, n) / Complex64::new(n as f64, 0.0), 0, 0.0, 0.0, opts));
    }
    let mut cmat = DMatrix::<Complex64>::zeros(n + 1, n + 1);
    for (m, &v) in y.coeffs().iter().enumerate() {
        cmat[(m, n)] = v / (2.0 * scale);
        cmat[(n, m)] = v.conj() / (2.0 * scale);
    }

    let mut rho = opts.rho;
    let mut z = DMatrix::<Complex64>::zeros(n + 1, n + 1);
    let mut u = DMatrix::<Complex64>::zeros(n + 1, n + 1);
    let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);
    let mut iterations = 0;
    let a = opts.relaxation;
    for it in 1..=opts.max_iter {
        iterations = it;
        let mut x = &z - &u + &cmat * Complex64::new(1.0 / rho, 0.0);
        project_affine(&mut x);
        let x_hat = &x * Complex64::new(a, 0.0) + &z * Complex64::new(1.0 - a, 0.0);
        let z_old = z;
        z = project_psd(&(&x_hat + &u));
        u += &x_hat - &z;

        let xz = fro(&x).max(fro(&z)).max(1.0);
        r_norm = fro(&(&x - &z)) / xz;
        s_norm = rho * fro(&(&z - &z_old)) / (rho * fro(&u)).max(1.0);
        if r_norm <= opts.tol && s_norm <= opts.tol {
            break;
        }
        if it % 20 == 0 {
            if r_norm > 10.0 * s_norm {
                rho *= 2.0;
                u /= Complex64::new(2.0, 0.0);
            } else if s_norm > 10.0 * r_norm {
                rho /= 2.0;
                u *= Complex64::new(2.0, 0.0);
            }
        }
    }
    if r_norm > opts.tol || s_norm > opts.tol {
        return Err(Error::NonConvergence {
            iterations,
            primal_residual: r_norm,
            dual_residual: s_norm,
        });
    }
    let c: Vec<Complex64> = (0..n).map(|m| z[(m, n)]).collect();
    let q = z.view((0, 0), (n, n)).into_owned();
    Ok(finish(y, c, q, iterations, r_norm, s_norm, opts))
}

/// The dual polynomial says nothing about the support when it never reaches
/// modulus one, or when it has modulus one everywhere (every grid point would
/// pass as a root).
fn is_degenerate(max_modulus: f64, max_vanishing: f64, opts: &SdpOptions) -> bool {
    max_modulus < 1.0 - 1e-3 || max_vanishing <= opts.root_band.max(1e-10)
}

fn finish(
    y: &SampleVector,
    c: Vec<Complex64>,
    q: DMatrix<Complex64>,
    iterations: usize,
    primal_residual: f64,
    dual_residual: f64,
    opts: &SdpOptions,
) -> DualSolution {
    let fc = y.fc();
    let objective = y.coeffs().iter().zip(&c).map(|(a, b)| (a * b.conj()).re).sum();
    let vals = fourier::eval_trig_poly_grid(&c, fc, 64 * y.n());
    let max_modulus = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let max_vanishing = vals
        .iter()
        .map(|v| (1.0 - v.norm_sqr()).abs())
        .fold(0.0, f64::max);
    let degenerate = is_degenerate(max_modulus, max_vanishing, opts);
    DualSolution {
        fc,
        c,
        q,
        objective,
        primal_residual,
        dual_residual,
        iterations,
        max_modulus,
        max_vanishing,
        degenerate,
    }
}

/// Coefficients of `1 - |F* c|^2` as a Laurent polynomial in `z = e^{i 2 pi t}`,
/// degrees `-2fc..=2fc`.
pub fn vanishing_polynomial(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    let mut p = vec![ZERO; 2 * n - 1];
    let mid = n - 1;
    for k in 0..n {
        let u: Complex64 = (k..n).map(|j| c[j] * c[j - k].conj()).sum();
        p[mid + k] = -u;
        p[mid - k] = -u.conj();
    }
    p[mid] = Complex64::new(1.0 + p[mid].re, 0.0);
    p
}

/// `g, g', g''` for `g(t) = 1 - |q(t)|^2`.
fn vanishing_derivs(c: &[Complex64], fc: usize, t: f64) -> [f64; 3] {
    let q = fourier::eval_trig_poly(c, fc, t);
    [
        1.0 - q[0].norm_sqr(),
        -2.0 * (q[0].conj() * q[1]).re,
        -2.0 * (q[1].norm_sqr() + (q[0].conj() * q[2]).re),
    ]
}

/// Newton iterations on `g'` from `t0`, kept within `radius` of the start;
/// falls back to golden-section minimization when the curvature is not
/// positive.
fn polish_root(c: &[Complex64], fc: usize, t0: f64, radius: f64) -> (f64, f64) {
    let mut t = t0;
    for _ in 0..50 {
        let d = vanishing_derivs(c, fc, t);
        if d[1].abs() < 1e-14 {
            break;
        }
        if d[2] <= 0.0 {
            return golden_min(c, fc, t0 - radius, t0 + radius);
        }
        let step = d[1] / d[2];
        let next = t - step;
        if (next - t0).abs() > radius {
            return golden_min(c, fc, t0 - radius, t0 + radius);
        }
        t = next;
        if step.abs() < 1e-16 {
            break;
        }
    }
    (model::wrap_unit(t), vanishing_derivs(c, fc, t)[0])
}

fn golden_min(c: &[Complex64], fc: usize, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = |t: f64| vanishing_derivs(c, fc, t)[0];
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    while b - a > 1e-15 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        }
    }
    let t = 0.5 * (a + b);
    (model::wrap_unit(t), g(t))
}

/// Roots of `z^{2fc} p(z)` from the eigenvalues of its companion matrix.
pub fn companion_roots(c: &[Complex64]) -> Vec<Complex64> {
    let p = vanishing_polynomial(c);
    let deg = p.len() - 1;
    let lead = p[deg];
    if lead.norm() == 0.0 || deg == 0 {
        return Vec::new();
    }
    let mut m = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -p[i] / lead;
    }
    match Schur::try_new(m, f64::EPSILON, 10_000) {
        Some(s) => s.eigenvalues().map(|e| e.iter().copied().collect()).unwrap_or_default(),
        None => Vec::new(),
    }
}

/// Support points of the primal solution: the points where `|F* c| = 1`.
pub fn locate_support(c: &[Complex64], opts: &SdpOptions) -> Result<Vec<f64>> {
    let n = c.len();
    if n % 2 == 0 || n < 3 {
        return Err(Error::InvalidInput("coefficient vector must have odd length >= 3".into()));
    }
    let fc = (n - 1) / 2;
    let vals = fourier::eval_trig_poly_grid(c, fc, 64 * n);
    let max_modulus = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let max_vanishing = vals
        .iter()
        .map(|v| (1.0 - v.norm_sqr()).abs())
        .fold(0.0, f64::max);
    if is_degenerate(max_modulus, max_vanishing, opts) {
        return Err(Error::Degenerate);
    }

    let m = (1usize << 14).max(64 * n);
    let g: Vec<f64> = fourier::eval_trig_poly_grid(c, fc, m)
        .iter()
        .map(|v| 1.0 - v.norm_sqr())
        .collect();
    let h = 1.0 / m as f64;
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for i in 0..m {
        let prev = g[(i + m - 1) % m];
        let next = g[(i + 1) % m];
        // the band is applied after polishing: a grid sample can sit far
        // enough from a double root to read well above it
        if g[i] < GRID_PREFILTER && g[i] <= prev && g[i] < next {
            roots.push(polish_root(c, fc, i as f64 * h, 2.0 * h));
        }
    }
    if opts.companion_check {
        for z in companion_roots(c) {
            if (z.norm() - 1.0).abs() <= 1e-4 {
                let t0 = model::wrap_unit(z.arg() / (2.0 * PI));
                let (t, v) = polish_root(c, fc, t0, 2.0 * h);
                if v < opts.root_band {
                    roots.push((t, v));
                }
            }
        }
    }
    // merge near-duplicates, keeping the representative with the smallest g
    let tol = opts.merge_tol / fc as f64;
    roots.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let mut kept: Vec<(f64, f64)> = Vec::new();
    for r in roots {
        if r.1 < opts.root_band && !kept.iter().any(|k| wrap_distance(k.0, r.0) <= tol) {
            kept.push(r);
        }
    }
    kept.truncate(n - 1);
    let mut out: Vec<f64> = kept.into_iter().map(|r| r.0).collect();
    out.sort_by(|a, b| a.total_cmp(b));
    Ok(out)
}

fn vandermonde(support: &[f64], fc: usize) -> DMatrix<Complex64> {
    let n = 2 * fc + 1;
    DMatrix::from_fn(n, support.len(), |i, j| {
        let k = i as f64 - fc as f64;
        Complex64::from_polar(1.0, -2.0 * PI * k * support[j])
    })
}

fn least_squares(support: &[f64], y: &SampleVector) -> Result<Vec<Complex64>> {
    let a = vandermonde(support, y.fc());
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax {
        return Err(Error::RankDeficient(format!(
            "{} support points give a singular system (condition {:.2e})",
            support.len(),
            smax / smin
        )));
    }
    let b = DVector::from_column_slice(y.coeffs());
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    Ok(x.iter().copied().collect())
}

/// Least-squares amplitudes on a fixed support; returns the pruned support
/// together with its amplitudes.
pub fn fit_amplitudes(
    support: &[f64],
    y: &SampleVector,
    opts: &SdpOptions,
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    if y.dim() != 1 {
        return Err(Error::InvalidInput("amplitude fit is 1-D only".into()));
    }
    if support.len() > y.n() - 1 {
        return Err(Error::InvalidInput(format!(
            "{} support points exceed n - 1 = {}",
            support.len(),
            y.n() - 1
        )));
    }
    if support.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let floor = opts.amp_floor * y.max_abs();
    let mut sup = support.to_vec();
    let mut amps = least_squares(&sup, y)?;
    while amps.iter().any(|a| a.norm() < floor) {
        let (s2, a2): (Vec<f64>, Vec<Complex64>) = sup
            .iter()
            .zip(&amps)
            .filter(|(_, a)| a.norm() >= floor)
            .map(|(&s, &a)| (s, a))
            .unzip();
        sup = s2;
        amps = a2;
        if sup.is_empty() {
            break;
        }
        amps = least_squares(&sup, y)?;
    }
    Ok((sup, amps))
}

/// Primal-dual pair refined by [`polish_optimality`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolishedPair {
    pub support: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub c: Vec<Complex64>,
    /// Euclidean norm of the optimality residual after refinement.
    pub residual: f64,
    pub iterations: usize,
}

/// Stacked optimality residual: data fit `F(T) a - y`, sign interpolation
/// `q(t_j) - a_j/|a_j|`, and stationarity `Re(conj(q) q')(t_j)`.
fn optimality_residual(y: &SampleVector, t: &[f64], a: &[Complex64], c: &[Complex64]) -> DVector<f64> {
    let fc = y.fc();
    let n = y.n();
    let s = t.len();
    let mut r = DVector::zeros(2 * n + 3 * s);
    for (i, &yk) in y.coeffs().iter().enumerate() {
        let k = i as f64 - fc as f64;
        let v: Complex64 = t
            .iter()
            .zip(a)
            .map(|(&tj, &aj)| aj * Complex64::from_polar(1.0, -2.0 * PI * k * tj))
            .sum::<Complex64>()
            - yk;
        r[2 * i] = v.re;
        r[2 * i + 1] = v.im;
    }
    for j in 0..s {
        let q = fourier::eval_trig_poly(c, fc, t[j]);
        let e = q[0] - a[j] / a[j].norm();
        r[2 * n + 2 * j] = e.re;
        r[2 * n + 2 * j + 1] = e.im;
        r[2 * n + 2 * s + j] = (q[0].conj() * q[1]).re;
    }
    r
}

fn optimality_jacobian(y: &SampleVector, t: &[f64], a: &[Complex64], c: &[Complex64]) -> DMatrix<f64> {
    let fc = y.fc();
    let n = y.n();
    let s = t.len();
    let dim = 2 * n + 3 * s;
    // unknowns: t (s), a as (re, im) pairs (2s), c as (re, im) pairs (2n)
    let (col_t, col_a, col_c) = (0, s, 3 * s);
    let mut jac = DMatrix::zeros(dim, dim);
    let i_unit = Complex64::new(0.0, 1.0);
    for i in 0..n {
        let k = i as f64 - fc as f64;
        for j in 0..s {
            let e = Complex64::from_polar(1.0, -2.0 * PI * k * t[j]);
            let dt = a[j] * Complex64::new(0.0, -2.0 * PI * k) * e;
            let da_re = e;
            let da_im = i_unit * e;
            for (row, part) in [(2 * i, 0), (2 * i + 1, 1)] {
                let pick = |z: Complex64| if part == 0 { z.re } else { z.im };
                jac[(row, col_t + j)] = pick(dt);
                jac[(row, col_a + 2 * j)] = pick(da_re);
                jac[(row, col_a + 2 * j + 1)] = pick(da_im);
            }
        }
    }
    for j in 0..s {
        let q = fourier::eval_trig_poly(c, fc, t[j]);
        let r = a[j].norm();
        let ds_re = Complex64::new(1.0 / r, 0.0) - a[j] * (a[j].re / (r * r * r));
        let ds_im = i_unit / r - a[j] * (a[j].im / (r * r * r));
        let row_v = 2 * n + 2 * j;
        let row_s = 2 * n + 2 * s + j;
        for (row, part) in [(row_v, 0), (row_v + 1, 1)] {
            let pick = |z: Complex64| if part == 0 { z.re } else { z.im };
            jac[(row, col_t + j)] = pick(q[1]);
            jac[(row, col_a + 2 * j)] = -pick(ds_re);
            jac[(row, col_a + 2 * j + 1)] = -pick(ds_im);
        }
        jac[(row_s, col_t + j)] = q[1].norm_sqr() + (q[0].conj() * q[2]).re;
        for m in 0..n {
            let k = m as f64 - fc as f64;
            let e = Complex64::from_polar(1.0, 2.0 * PI * k * t[j]);
            let w = Complex64::new(0.0, 2.0 * PI * k);
            for (off, dc) in [(0, e), (1, i_unit * e)] {
                let col = col_c + 2 * m + off;
                jac[(row_v, col)] = dc.re;
                jac[(row_v + 1, col)] = dc.im;
                jac[(row_s, col)] = (dc.conj() * q[1] + q[0].conj() * w * dc).re;
            }
        }
    }
    jac
}

/// Newton refinement of a primal-dual pair on the optimality conditions
/// (exact data fit, sign interpolation, stationarity of `|q|` on the support).
/// The system has `2n + 3|T|` equations in as many real unknowns; steps are
/// minimum-norm least-squares solutions.
/// Returns `None` when the iteration fails to reduce the residual or leaves
/// the neighbourhood of the starting point.
pub fn polish_optimality(
    y: &SampleVector,
    support: &[f64],
    amplitudes: &[Complex64],
    c: &[Complex64],
) -> Option<PolishedPair> {
    let s = support.len();
    if s == 0 || amplitudes.iter().any(|a| a.norm() == 0.0) {
        return None;
    }
    let n = y.n();
    let fc = y.fc() as f64;
    let mut t = support.to_vec();
    let mut a = amplitudes.to_vec();
    let mut cc = c.to_vec();
    let mut res = optimality_residual(y, &t, &a, &cc).norm();
    let start = res;
    let mut iterations = 0;
    for _ in 0..8 {
        if res < 1e-14 * (1.0 + y.max_abs()) {
            break;
        }
        let jac = optimality_jacobian(y, &t, &a, &cc);
        let f = optimality_residual(y, &t, &a, &cc);
        // minimum-norm step: the dual coefficients are not unique when the
        // support is small, which leaves the Jacobian rank-deficient
        let svd = jac.svd(true, true);
        let eps = 1e-12 * svd.singular_values.max();
        let delta = svd.solve(&(-f), eps).ok()?;
        let mut nt = t.clone();
        let mut na = a.clone();
        let mut nc = cc.clone();
        for j in 0..s {
            nt[j] += delta[j];
            na[j] += Complex64::new(delta[s + 2 * j], delta[s + 2 * j + 1]);
        }
        for m in 0..n {
            nc[m] += Complex64::new(delta[3 * s + 2 * m], delta[3 * s + 2 * m + 1]);
        }
        if na.iter().any(|v| v.norm() == 0.0) {
            return None;
        }
        let nres = optimality_residual(y, &nt, &na, &nc).norm();
        if !(nres < res) {
            break;
        }
        t = nt;
        a = na;
        cc = nc;
        res = nres;
        iterations += 1;
    }
    let moved = t
        .iter()
        .zip(support)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if iterations == 0 || !(res < start) || moved > 1e-2 / fc {
        return None;
    }
    Some(PolishedPair {
        support: t.iter().map(|&v| model::wrap_unit(v)).collect(),
        amplitudes: a,
        c: cc,
        residual: res,
        iterations,
    })
}

/// Result of the full recovery pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub measure: AtomicMeasure,
    /// `| ||x_hat||_TV - Re <y, c> |`.
    pub duality_gap: f64,
    pub dual_objective: f64,
    /// `||F x_hat - y||_2`.
    pub residual: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Roots found before amplitude pruning.
    pub root_count: usize,
    /// Whether the joint Newton refinement was applied.
    pub polished: bool,
    /// Dual coefficients.
    pub c: Vec<Complex64>,
    /// Matching against the ground truth, when supplied.
    pub support_errors: Option<MatchReport>,
}

/// Solve the dual, locate the support, fit amplitudes.
pub fn tv_superresolve(
    y: &SampleVector,
    opts: &SdpOptions,
    truth: Option<&AtomicMeasure>,
) -> Result<RecoveryResult> {
    if y.dim() != 1 {
        return Err(Error::InvalidInput("the SDP route is 1-D only".into()));
    }
    let errors_for = |m: &AtomicMeasure| {
        truth.map(|tr| match_locations(m.locations(), tr.locations()))
    };
    if y.max_abs() == 0.0 {
        let measure = AtomicMeasure::empty_1d();
        return Ok(RecoveryResult {
            support_errors: errors_for(&measure),
            measure,
            duality_gap: 0.0,
            dual_objective: 0.0,
            residual: 0.0,
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            root_count: 0,
            polished: false,
            c: vec![ZERO; y.n()],
        });
    }
    let dual = solve_dual(y, opts)?;
    if dual.degenerate {
        return Err(Error::Degenerate);
    }
    let roots = locate_support(&dual.c, opts)?;
    let (mut sup, mut amps) = fit_amplitudes(&roots, y, opts)?;
    let mut c = dual.c.clone();
    let mut objective = dual.objective;
    let mut polished = false;
    if opts.polish {
        if let Some(p) = polish_optimality(y, &sup, &amps, &c) {
            // keep the refinement only if the dual stays feasible
            let peak = fourier::eval_trig_poly_grid(&p.c, y.fc(), 64 * y.n())
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max);
            let distinct = AtomicMeasure::new_1d(p.support.clone(), p.amplitudes.clone()).is_ok();
            if peak <= 1.0 + 1e-9 && distinct {
                sup = p.support;
                amps = p.amplitudes;
                objective = y.coeffs().iter().zip(&p.c).map(|(a, b)| (a * b.conj()).re).sum();
                c = p.c;
                polished = true;
            }
        }
    }
    let measure = AtomicMeasure::new_1d(sup, amps)?.sorted();
    let fitted = model::sample_spikes(&measure, y.fc());
    let residual = fitted
        .coeffs()
        .iter()
        .zip(y.coeffs())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(RecoveryResult {
        duality_gap: (model::tv_norm(&measure) - objective).abs(),
        dual_objective: objective,
        polished,
        residual,
        iterations: dual.iterations,
        primal_residual: dual.primal_residual,
        dual_residual: dual.dual_residual,
        root_count: roots.len(),
        support_errors: errors_for(&measure),
        c,
        measure,
    })
}

/// Locations of a recovered measure, for convenience in reports.
pub fn support_of(result: &RecoveryResult) -> &[f64] {
    match result.measure.locations() {
        Locations::OneD(v) => v,
        Locations::TwoD(v) => {
            debug_assert!(v.is_empty());
            &[]
        }
    }
}
