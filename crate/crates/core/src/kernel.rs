//! The squared-Fejér interpolation kernel, its derivatives, decay bounds and
//! neighbor-sum bounds, plus the 2-D tensor kernel.
//!
//! `K(t) = g(t)^4` with `g(t) = sin(f pi t) / (f sin(pi t))` and `f = fc/2 + 1`.
//! Away from the origin `g` and its derivatives are evaluated by the quotient
//! rule; close to the origin the quotient cancels catastrophically, so `g` is
//! evaluated through its exact finite cosine expansion
//! `g(t) = (1/f) sum_{m<f} cos(pi (f-1-2m) t)` instead.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Far-field constants of the decay bound, one per derivative order.
pub const H_INF: [f64; 4] = [1.0, 4.0, 18.0, 77.0];

/// Number of explicitly summed neighbors in the tail-sum bound.
pub const TAIL_TERMS: usize = 20;

/// Grid points used to scan the inner maxima of the tail-sum bound.
const TAIL_SCAN: usize = 10_000;

/// Below this value of `f pi |t|` the cosine expansion is used.
const NEAR_ORIGIN: f64 = 0.2;

/// `pi^4/45 - 2 sum_{j=1}^{19} j^-4`, the weight of the far neighbors.
pub fn tail_kappa() -> f64 {
    let s: f64 = (1..TAIL_TERMS).map(|j| 1.0 / (j as f64).powi(4)).sum();
    PI.powi(4) / 45.0 - 2.0 * s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    fc: usize,
}

impl KernelSpec {
    pub fn new(fc: usize) -> Result<Self> {
        if fc % 2 != 0 {
            return Err(Error::OddCutoff(fc));
        }
        if fc < 4 {
            return Err(Error::Domain(format!("kernel cutoff must be at least 4, got {fc}")));
        }
        Ok(Self { fc })
    }

    pub fn fc(&self) -> usize {
        self.fc
    }

    /// Fejér order `fc/2 + 1`.
    pub fn f(&self) -> usize {
        self.fc / 2 + 1
    }

    pub fn lambda_c(&self) -> f64 {
        1.0 / self.fc as f64
    }

    /// `K''(0) = -pi^2 fc (fc + 4) / 3`.
    pub fn k2_at_zero(&self) -> f64 {
        let fc = self.fc as f64;
        -PI * PI * fc * (fc + 4.0) / 3.0
    }

    /// `K, K', K'', K'''` at `t` (any real; the kernel is 1-periodic).
    pub fn eval_all(&self, t: f64) -> [f64; 4] {
        let t = t - t.round();
        let g = self.fejer_root(t);
        let [g0, g1, g2, g3] = g;
        let g0sq = g0 * g0;
        [
            g0sq * g0sq,
            4.0 * g0sq * g0 * g1,
            12.0 * g0sq * g1 * g1 + 4.0 * g0sq * g0 * g2,
            24.0 * g0 * g1 * g1 * g1 + 36.0 * g0sq * g1 * g2 + 4.0 * g0sq * g0 * g3,
        ]
    }

    /// `K^(order)(t)` for `order <= 3`, without domain checks.
    pub fn eval(&self, t: f64, order: usize) -> f64 {
        self.eval_all(t)[order]
    }

    /// `g, g', g'', g'''` for `|t| <= 1/2`.
    fn fejer_root(&self, t: f64) -> [f64; 4] {
        let f = self.f() as f64;
        if f * PI * t.abs() < NEAR_ORIGIN {
            // exact cosine expansion; symmetric pairs give 2 cos terms
            let fi = self.f();
            let mut g = [0.0; 4];
            for m in 0..fi {
                let w = PI * (fi as f64 - 1.0 - 2.0 * m as f64);
                let (s, c) = (w * t).sin_cos();
                g[0] += c;
                g[1] -= w * s;
                g[2] -= w * w * c;
                g[3] += w * w * w * s;
            }
            return g.map(|v| v / f);
        }
        let (su, cu) = (f * PI * t).sin_cos();
        let (sv, cv) = (PI * t).sin_cos();
        let u = [su / f, PI * cu, -PI * PI * f * su, -PI.powi(3) * f * f * cu];
        let v = [sv, PI * cv, -PI * PI * sv, -PI.powi(3) * cv];
        let g0 = u[0] / v[0];
        let g1 = (u[1] - g0 * v[1]) / v[0];
        let g2 = (u[2] - 2.0 * g1 * v[1] - g0 * v[2]) / v[0];
        let g3 = (u[3] - 3.0 * g2 * v[1] - 3.0 * g1 * v[2] - g0 * v[3]) / v[0];
        [g0, g1, g2, g3]
    }

    /// Fourier coefficients of `K`, indexed `k = -fc..=fc`. Real and even.
    pub fn fourier_coeffs(&self) -> Vec<f64> {
        let f = self.f() as i64;
        let fejer: Vec<f64> = (-(f - 1)..f)
            .map(|k| (f - k.abs()) as f64 / (f * f) as f64)
            .collect();
        let m = fejer.len();
        let mut out = vec![0.0; 2 * m - 1];
        for (i, a) in fejer.iter().enumerate() {
            for (j, b) in fejer.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        debug_assert_eq!(out.len(), 2 * self.fc + 1);
        out
    }
}

/// `K^(order)(t)` with argument checks.
pub fn kernel_eval(spec: &KernelSpec, t: f64, order: usize) -> Result<f64> {
    if order > 3 {
        return Err(Error::Domain(format!("derivative order {order} > 3")));
    }
    if !(t.abs() <= 0.5) {
        return Err(Error::Domain(format!("|t| = {} exceeds 1/2", t.abs())));
    }
    Ok(spec.eval(t, order))
}

fn bound_a(t: f64) -> f64 {
    2.0 / (PI * (1.0 - PI * PI * t * t / 6.0))
}

/// `H_l(t)` of the near-field decay bound.
fn h_near(fc: f64, t: f64, order: usize) -> f64 {
    let a = bound_a(t);
    let b = a / (fc * t);
    let a4 = a.powi(4);
    a4 * match order {
        0 => 1.0,
        1 => 2.0 + 2.0 * b,
        2 => 4.0 + 7.0 * b + 6.0 * b * b,
        _ => 8.0 + 24.0 * b + 30.0 * b * b + 15.0 * b * b * b,
    }
}

/// Near-field form of the decay bound, used for every explicit neighbor in
/// the tail sum.
fn bound_near(spec: &KernelSpec, t: f64, order: usize) -> f64 {
    let fc = spec.fc() as f64;
    PI.powi(order as i32) * h_near(fc, t, order) / ((fc + 2.0).powi(4 - order as i32) * t.powi(4))
}

fn bound_unchecked(spec: &KernelSpec, t: f64, order: usize) -> f64 {
    if t <= 2f64.sqrt() / PI {
        bound_near(spec, t, order)
    } else {
        let fc = spec.fc() as f64;
        PI.powi(order as i32) * H_INF[order] / ((fc + 2.0).powi(4 - order as i32) * t.powi(4))
    }
}

/// Decay bound `B_l(t) >= |K^(l)(t)|` on `lambda_c/2 <= t < 1/2`.
pub fn kernel_bound(spec: &KernelSpec, t: f64, order: usize) -> Result<f64> {
    if order > 3 {
        return Err(Error::Domain(format!("derivative order {order} > 3")));
    }
    if !(t >= spec.lambda_c() / 2.0 && t < 0.5) {
        return Err(Error::Domain(format!(
            "bound defined on [lambda_c/2, 1/2), got t = {t}"
        )));
    }
    Ok(bound_unchecked(spec, t, order))
}

/// Maximizes `h` over `[lo, hi]`: dense scan then golden-section refinement
/// around the best sample.
fn scan_max(lo: f64, hi: f64, h: impl Fn(f64) -> f64) -> f64 {
    if hi <= lo {
        return h(lo);
    }
    let step = (hi - lo) / TAIL_SCAN as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=TAIL_SCAN {
        let v = h(lo + step * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut a = (lo + step * (best_i as f64 - 1.0)).max(lo);
    let mut b = (lo + step * (best_i as f64 + 1.0)).min(hi);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = h(x1);
    let mut f2 = h(x2);
    while b - a > 1e-10 {
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
    best.max(f1).max(f2)
}

/// Neighbor-sum bound `F_l(delta, t)` with the minimum separation taken equal
/// to `delta`.
pub fn kernel_tail_sum(spec: &KernelSpec, delta: f64, t: f64, order: usize) -> Result<f64> {
    kernel_tail_sum_with_min(spec, delta, delta, t, order)
}

/// Neighbor-sum bound `F_l(delta, t)` for supports whose nearest neighbors
/// sit at distance `delta` and whose minimum separation is `delta_min`.
pub fn kernel_tail_sum_with_min(
    spec: &KernelSpec,
    delta: f64,
    delta_min: f64,
    t: f64,
    order: usize,
) -> Result<f64> {
    if order > 3 {
        return Err(Error::Domain(format!("derivative order {order} > 3")));
    }
    if spec.fc() < 128 {
        return Err(Error::Domain(format!(
            "tail-sum bound requires fc >= 128, got {}",
            spec.fc()
        )));
    }
    if !(delta_min > 0.0 && delta >= delta_min) {
        return Err(Error::Domain("need 0 < delta_min <= delta".into()));
    }
    if !(t >= 0.0 && t <= delta / 2.0) {
        return Err(Error::Domain(format!("need 0 <= t <= delta/2, got t = {t}")));
    }
    if (TAIL_TERMS as f64) * delta_min + t >= 0.5 || 3.0 * delta_min - t < spec.lambda_c() / 2.0 {
        return Err(Error::Domain(format!(
            "separation {delta_min} outside the range covered by the bound"
        )));
    }
    let hi = 3.0 * delta_min;
    let near_plus = scan_max(delta, hi, |tp| spec.eval(t - tp, order).abs())
        .max(bound_unchecked(spec, hi - t, order));
    let near_minus = scan_max(delta, hi, |tm| spec.eval(tm, order).abs())
        .max(bound_unchecked(spec, hi, order));
    let mut plus = near_plus;
    let mut minus = near_minus;
    for j in 2..=TAIL_TERMS {
        let d = j as f64 * delta_min;
        plus += bound_near(spec, d - t, order);
        minus += bound_near(spec, d + t, order);
    }
    let fc = spec.fc() as f64;
    let far = tail_kappa() * PI.powi(order as i32) * H_INF[order]
        / ((fc + 2.0).powi(4 - order as i32) * delta_min.powi(4));
    Ok(plus + minus + far)
}

/// One row of neighbor-sum bounds, with order `l` divided by `fc^l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t_over_lambda_c: f64,
    pub values: [f64; 4],
}

/// `F_l(delta, t) / fc^l` for `l = 0..4` at each `t`, with `delta` and `t`
/// in units of `lambda_c`.
pub fn tail_sum_table(spec: &KernelSpec, delta_over_lc: f64, t_over_lc: &[f64]) -> Result<Vec<TailRow>> {
    let lc = spec.lambda_c();
    let fc = spec.fc() as f64;
    t_over_lc
        .iter()
        .map(|&t| {
            let mut values = [0.0; 4];
            for (l, v) in values.iter_mut().enumerate() {
                *v = kernel_tail_sum(spec, delta_over_lc * lc, t * lc, l)? / fc.powi(l as i32);
            }
            Ok(TailRow {
                t_over_lambda_c: t,
                values,
            })
        })
        .collect()
}

/// CSV with header `t/lambda_c,F0,F1,F2,F3`.
pub fn tail_table_csv(rows: &[TailRow]) -> String {
    let mut out = String::from("t/lambda_c,F0,F1,F2,F3\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6e},{:.6e},{:.6e},{:.6e}\n",
            r.t_over_lambda_c, r.values[0], r.values[1], r.values[2], r.values[3]
        ));
    }
    out
}

/// Tensor kernel `K^(l1)(x) K^(l2)(y)`.
pub fn kernel2d_eval(spec: &KernelSpec, r: [f64; 2], orders: (usize, usize)) -> Result<f64> {
    if orders.0 + orders.1 > 3 {
        return Err(Error::Domain("total derivative order exceeds 3".into()));
    }
    Ok(kernel_eval(spec, r[0], orders.0)? * kernel_eval(spec, r[1], orders.1)?)
}
