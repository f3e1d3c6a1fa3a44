use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use superres_core::certificate::{build_certificate, eval_certificate};
use superres_core::discrete::{basis_pursuit, l1_norm, noisy_l1, L1Options};
use superres_core::fourier::{eval_trig_poly, PartialDft};
use superres_core::model::{sample_discrete, sample_spikes, wrap_distance};
use superres_core::sdp::vanishing_polynomial;
use superres_core::slepian::{dirichlet, TimeBandOperator};
use superres_core::{harness, AtomicMeasure, Geometry, KernelSpec};

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Grid signal with `k` unit-phase spikes at least `sep` apart (cyclically).
fn sparse_grid_signal(n_grid: usize, k: usize, sep: usize) -> impl Strategy<Value = Vec<Complex64>> {
    (0..n_grid, prop::collection::vec(0.0..1.0f64, k), prop::collection::vec(0.0..1.0f64, k), 0.5..2.0f64)
        .prop_filter_map("spikes do not fit", move |(start, slack, phases, scale)| {
            let free = n_grid.checked_sub(k * sep)?;
            let total: f64 = slack.iter().sum::<f64>().max(1e-12);
            let mut x = vec![Complex64::new(0.0, 0.0); n_grid];
            let mut pos = start as f64;
            for (s, ph) in slack.iter().zip(&phases) {
                let idx = pos.round() as usize % n_grid;
                x[idx] = Complex64::from_polar(scale, 2.0 * PI * ph);
                pos += sep as f64 + free as f64 * s / total * 0.999;
            }
            (x.iter().filter(|v| v.norm() > 0.0).count() == k).then_some(x)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lowpass_is_an_orthogonal_projection(
        x in prop::collection::vec(complex(), 48),
        z in prop::collection::vec(complex(), 48),
        fc in 1usize..20,
    ) {
        let op = PartialDft::new(48, fc);
        let px = op.lowpass(&x);
        prop_assert!(max_diff(&op.lowpass(&px), &px) < 1e-12);
        let lhs = dot(&px, &z);
        let rhs = dot(&x, &op.lowpass(&z));
        prop_assert!((lhs - rhs).norm() < 1e-11);
    }

    #[test]
    fn forward_and_adjoint_agree(
        x in prop::collection::vec(complex(), 40),
        y in prop::collection::vec(complex(), 11),
    ) {
        let op = PartialDft::new(40, 5);
        let lhs = dot(&op.forward(&x), &y);
        let rhs = dot(&x, &op.adjoint(&y));
        prop_assert!((lhs - rhs).norm() < 1e-10);
        let direct = sample_discrete(&x, 5).unwrap();
        prop_assert!(max_diff(direct.coeffs(), &op.forward(&x)) < 1e-10);
    }

    #[test]
    fn sampling_is_linear(
        t in prop::collection::vec(0.0..1.0f64, 1..6),
        a in prop::collection::vec(complex(), 6),
        b in prop::collection::vec(complex(), 6),
        w in complex(),
        fc in 1usize..30,
    ) {
        let k = t.len();
        let xa = AtomicMeasure::new_1d(t.clone(), a[..k].to_vec()).unwrap();
        let xb = AtomicMeasure::new_1d(t.clone(), b[..k].to_vec()).unwrap();
        let mix: Vec<Complex64> = (0..k).map(|j| w * a[j] + b[j]).collect();
        let xm = AtomicMeasure::new_1d(t, mix).unwrap();
        let (ya, yb, ym) = (sample_spikes(&xa, fc), sample_spikes(&xb, fc), sample_spikes(&xm, fc));
        let combo: Vec<Complex64> = ya.coeffs().iter().zip(yb.coeffs()).map(|(p, q)| w * p + q).collect();
        prop_assert!(max_diff(ym.coeffs(), &combo) < 1e-12);
    }

    #[test]
    fn wrap_distance_is_a_metric_on_the_circle(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64) {
        let d = wrap_distance(a, b);
        prop_assert!((0.0..=0.5).contains(&d));
        prop_assert!((d - wrap_distance(b, a)).abs() < 1e-15);
        prop_assert!(wrap_distance(a, c) <= d + wrap_distance(b, c) + 1e-12);
        prop_assert!(wrap_distance(a, a + 1.0) < 1e-12);
    }

    #[test]
    fn vanishing_polynomial_matches_its_definition(
        c in prop::collection::vec(complex(), 1..12),
        t in 0.0..1.0f64,
    ) {
        let fc = (c.len() - 1) / 2;
        let c = &c[..2 * fc + 1];
        let p = vanishing_polynomial(c);
        let mid = (p.len() - 1) as i64 / 2;
        let value: Complex64 = p
            .iter()
            .enumerate()
            .map(|(i, v)| v * Complex64::from_polar(1.0, 2.0 * PI * (i as i64 - mid) as f64 * t))
            .sum();
        let q = eval_trig_poly(c, fc, t)[0];
        prop_assert!(value.im.abs() < 1e-10);
        prop_assert!((value.re - (1.0 - q.norm_sqr())).abs() < 1e-10);
    }

    #[test]
    fn vanishing_polynomial_is_nonnegative_for_bounded_duals(
        c in prop::collection::vec(complex(), 1..12),
        t in 0.0..1.0f64,
    ) {
        let fc = (c.len() - 1) / 2;
        let c = &c[..2 * fc + 1];
        // scale so that the l1 norm of the coefficients, a bound on max |q|, is one
        let l1: f64 = c.iter().map(|v| v.norm()).sum();
        prop_assume!(l1 > 1e-6);
        let c: Vec<Complex64> = c.iter().map(|v| v / l1).collect();
        let p = vanishing_polynomial(&c);
        let mid = (p.len() - 1) as i64 / 2;
        let value: f64 = p
            .iter()
            .enumerate()
            .map(|(i, v)| (v * Complex64::from_polar(1.0, 2.0 * PI * (i as i64 - mid) as f64 * t)).re)
            .sum();
        prop_assert!(value >= -1e-12);
    }

    #[test]
    fn kernel_parity(t in 0.0..0.5f64, half in 2usize..150) {
        let fc = 2 * half;
        let spec = KernelSpec::new(fc).unwrap();
        let plus = spec.eval_all(t);
        let minus = spec.eval_all(-t);
        let scale = [1.0, fc as f64, (fc * fc) as f64, (fc * fc * fc) as f64];
        for l in 0..4 {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((plus[l] - sign * minus[l]).abs() <= 1e-9 * scale[l] * 2.0 * PI);
        }
        prop_assert!((spec.eval(t, 0) - spec.eval(t + 1.0, 0)).abs() < 1e-12);
        prop_assert!(plus[0] <= 1.0 + 1e-12 && plus[0] >= -1e-12);
    }

    #[test]
    fn timeband_trace_and_spectrum(n_grid in 16usize..200, n_frac in 0.05..1.0f64, k_frac in 0.05..0.5f64) {
        let n = ((n_grid as f64 * n_frac) as usize).clamp(1, n_grid);
        let k = ((n_grid as f64 * k_frac) as usize).clamp(1, n_grid);
        let op = TimeBandOperator::new(n_grid, n, k).unwrap();
        let s = op.spectrum();
        let trace: f64 = s.raw.iter().sum();
        prop_assert!((trace - k as f64 * n as f64 / n_grid as f64).abs() < 1e-9 * k as f64);
        prop_assert!(s.raw.iter().all(|&v| v > -1e-12 && v < 1.0 + 1e-12));
        // the lag kernel is even and N-periodic up to the sign (-1)^(n-1)
        let flip = if n % 2 == 1 { 1.0 } else { -1.0 };
        for d in -(k as i64)..=k as i64 {
            prop_assert!((dirichlet(n_grid, n, d) - flip * dirichlet(n_grid, n, d + n_grid as i64)).abs() < 1e-12);
            prop_assert!((dirichlet(n_grid, n, d) - dirichlet(n_grid, n, -d)).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn certificate_interpolates_with_flat_modulus(seed in 0u64..1000, k in 2usize..8) {
        let spec = KernelSpec::new(128).unwrap();
        let (x, _) = harness::simulate(128, k, 2.5, seed).unwrap();
        let t = x.locations_1d().to_vec();
        let v: Vec<Complex64> = x.amplitudes().iter().map(|a| a / a.norm()).collect();
        let cert = build_certificate(&t, &v, &spec).unwrap();
        for (tj, vj) in t.iter().zip(&v) {
            prop_assert!((eval_certificate(&cert, *tj, 0).unwrap() - vj).norm() < 1e-9);
            let q = eval_certificate(&cert, *tj, 0).unwrap();
            let dq = eval_certificate(&cert, *tj, 1).unwrap();
            prop_assert!((q.conj() * dq).re.abs() < 1e-9 * 128.0);
        }
    }

    #[test]
    fn basis_pursuit_is_consistent_with_the_samples(x in sparse_grid_signal(48, 3, 12)) {
        let fc = 6;
        let g = Geometry::new(48, fc).unwrap();
        let y = sample_discrete(&x, fc).unwrap();
        let sol = basis_pursuit(&y, &g, &L1Options::default()).unwrap();
        let fit = sample_discrete(&sol.x, fc).unwrap();
        let scale = y.coeffs().iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(max_diff(fit.coeffs(), y.coeffs()) < 1e-6 * scale);
        prop_assert!(l1_norm(&sol.x) <= l1_norm(&x) * (1.0 + 1e-6));
    }

    #[test]
    fn noisy_solution_is_feasible(x in sparse_grid_signal(48, 3, 12), noise in prop::collection::vec(complex(), 48)) {
        let (n_grid, fc, delta) = (48, 6, 1e-2);
        let g = Geometry::new(n_grid, fc).unwrap();
        let op = PartialDft::new(n_grid, fc);
        let pz = op.lowpass(&noise);
        let norm = l1_norm(&pz);
        prop_assume!(norm > 1e-9);
        let s: Vec<Complex64> = op.lowpass(&x).iter().zip(&pz).map(|(a, b)| a + b * (delta / norm)).collect();
        let sol = noisy_l1(&s, &g, delta, &L1Options::default()).unwrap();
        let fit = op.lowpass(&sol.x);
        let resid: Vec<Complex64> = fit.iter().zip(&s).map(|(a, b)| a - b).collect();
        prop_assert!(l1_norm(&resid) <= delta * (1.0 + 1e-6));
        let h: Vec<Complex64> = sol.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        prop_assert!(l1_norm(&op.lowpass(&h)) <= 2.0 * delta * (1.0 + 1e-6));
    }

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>(), k in 1usize..6) {
        let a = harness::simulate(40, k, 2.0, seed).unwrap();
        let b = harness::simulate(40, k, 2.0, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
