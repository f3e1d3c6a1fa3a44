//! Experiment drivers: recovery benchmark, random-data study, adversarial
//! phase transition, stability sweeps and piecewise-constant recovery.
//!
//! Every random draw comes from a ChaCha8 stream keyed by `(seed, trial)`, so
//! trials can run on a thread pool and still reproduce bit for bit.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrete::{self, restricted_matrix, BpVerdict, L1Options};
use crate::error::{Error, Result};
use crate::fourier::{self, PartialDft};
use crate::matching::match_locations;
use crate::model::{self, wrap_distance, AtomicMeasure, Geometry, Locations, SampleVector};
use crate::sdp::{self, SdpOptions};
use crate::slepian::dirichlet;

/// Normalized l2 error below which a recovery counts as a success.
pub const SUCCESS_THRESHOLD: f64 = 1e-4;

/// Attempts allowed when drawing a separated support.
pub const MAX_SUPPORT_ATTEMPTS: usize = 1_000_000;

/// Support errors of the interior-point reference runs: `(fc, average, max)`.
pub const REFERENCE_SUPPORT_ERRORS: [(usize, f64, f64); 4] = [
    (25, 6.66e-9, 1.83e-7),
    (50, 1.70e-9, 8.14e-8),
    (75, 5.58e-10, 2.55e-8),
    (100, 2.96e-10, 2.31e-8),
];

/// Random stream for one trial of one experiment.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Shared settings of an experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub sdp: SdpOptions,
    pub l1: L1Options,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 1,
            sdp: SdpOptions::default(),
            l1: L1Options::default(),
        }
    }
}

/// One point of a phase-transition trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub srf: f64,
    pub k: usize,
    pub delta_grid: usize,
    pub success: bool,
    pub normalized_error: f64,
}

impl PhasePoint {
    pub fn new(srf: f64, k: usize, delta_grid: usize, normalized_error: f64) -> Self {
        Self {
            srf,
            k,
            delta_grid,
            success: normalized_error < SUCCESS_THRESHOLD,
            normalized_error,
        }
    }
}

/// Draws `k` points on the circle, pairwise at least `min_sep` apart, one at a
/// time with rejection.
pub fn random_separated_support<R: Rng>(rng: &mut R, k: usize, min_sep: f64) -> Result<Vec<f64>> {
    if k as f64 * min_sep >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "{k} points at separation {min_sep} do not fit on the circle"
        )));
    }
    let mut pts: Vec<f64> = Vec::with_capacity(k);
    let mut attempts = 0;
    while pts.len() < k {
        attempts += 1;
        if attempts > MAX_SUPPORT_ATTEMPTS {
            return Err(Error::InvalidInput(format!(
                "no separated support found in {MAX_SUPPORT_ATTEMPTS} draws"
            )));
        }
        let t: f64 = rng.random();
        if pts.iter().all(|&p| wrap_distance(p, t) >= min_sep) {
            pts.push(t);
        }
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    Ok(pts)
}

/// Same on the grid `{0, .., N-1}` with wrap-around separation `min_sep`.
pub fn random_separated_grid_support<R: Rng>(
    rng: &mut R,
    n_grid: usize,
    k: usize,
    min_sep: usize,
) -> Result<Vec<usize>> {
    if k * min_sep.max(1) > n_grid {
        return Err(Error::InfeasiblePacking {
            k,
            separation: min_sep,
            n_grid,
        });
    }
    let mut pts: Vec<usize> = Vec::with_capacity(k);
    let mut attempts = 0;
    while pts.len() < k {
        attempts += 1;
        if attempts > MAX_SUPPORT_ATTEMPTS {
            return Err(Error::InfeasiblePacking {
                k,
                separation: min_sep,
                n_grid,
            });
        }
        let t = rng.random_range(0..n_grid);
        if pts.iter().all(|&p| grid_distance(n_grid, p, t) >= min_sep.max(1)) {
            pts.push(t);
        }
    }
    pts.sort_unstable();
    Ok(pts)
}

/// `k` points on the circle whose minimum separation is exactly `sep`: gaps
/// are `sep` plus a random share of the slack, with one gap given no slack.
pub fn random_tight_support<R: Rng>(rng: &mut R, k: usize, sep: f64) -> Result<Vec<f64>> {
    if k < 2 || k as f64 * sep >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "need k >= 2 points at separation {sep} that fit on the circle, got k = {k}"
        )));
    }
    let slack = 1.0 - k as f64 * sep;
    let mut w: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    w[rng.random_range(0..k)] = 0.0;
    let total: f64 = w.iter().sum();
    let start: f64 = rng.random();
    let mut pts = Vec::with_capacity(k);
    let mut t = start;
    for wi in &w {
        pts.push(model::wrap_unit(t));
        t += sep + slack * wi / total;
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    Ok(pts)
}

/// `k` points on the torus inside a random square window of side `window`,
/// pairwise at least `sep` apart in the wrap-around sup distance, with the
/// first two exactly `sep` apart.
pub fn random_tight_support_2d<R: Rng>(rng: &mut R, k: usize, sep: f64, window: f64) -> Result<Vec<[f64; 2]>> {
    if k < 2 || window < 2.0 * sep || window >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "need k >= 2 and 2 sep <= window < 1 (k = {k}, sep = {sep}, window = {window})"
        )));
    }
    let origin = [rng.random::<f64>(), rng.random::<f64>()];
    let at = |u: f64, v: f64| [model::wrap_unit(origin[0] + u), model::wrap_unit(origin[1] + v)];
    let u0 = rng.random::<f64>() * (window - sep);
    let v0 = rng.random::<f64>() * window;
    let v1 = (v0 + sep * (2.0 * rng.random::<f64>() - 1.0)).clamp(0.0, window);
    let mut pts = vec![at(u0, v0), at(u0 + sep, v1)];
    let mut attempts = 0;
    while pts.len() < k {
        attempts += 1;
        if attempts > MAX_SUPPORT_ATTEMPTS {
            return Err(Error::InvalidInput(format!(
                "no separated support found in {MAX_SUPPORT_ATTEMPTS} draws"
            )));
        }
        let p = at(rng.random::<f64>() * window, rng.random::<f64>() * window);
        if pts.iter().all(|q| model::wrap_distance_2d(*q, p) >= sep) {
            pts.push(p);
        }
    }
    Ok(pts)
}

fn grid_distance(n_grid: usize, a: usize, b: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n_grid - d)
}

/// Unit-modulus amplitudes with uniform phases.
pub fn random_phases<R: Rng>(rng: &mut R, k: usize) -> Vec<Complex64> {
    (0..k)
        .map(|_| Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>()))
        .collect()
}

/// Random `+-1` amplitudes.
pub fn random_signs<R: Rng>(rng: &mut R, k: usize) -> Vec<Complex64> {
    (0..k)
        .map(|_| Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0))
        .collect()
}

/// A random measure with `k` spikes separated by `min_sep_lambda / fc` and
/// unit random-phase amplitudes, together with its samples.
pub fn simulate(fc: usize, k: usize, min_sep_lambda: f64, seed: u64) -> Result<(AtomicMeasure, SampleVector)> {
    let mut rng = trial_rng(seed, 0);
    let t = random_separated_support(&mut rng, k, min_sep_lambda / fc as f64)?;
    let a = random_phases(&mut rng, k);
    let x = AtomicMeasure::new_1d(t, a)?;
    let y = model::sample_spikes(&x, fc);
    Ok((x, y))
}

/// One trial of the exact-recovery benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryTrial {
    pub fc: usize,
    pub trial: usize,
    pub spikes: usize,
    pub recovered_spikes: usize,
    /// Same cardinality and every truth matched.
    pub complete: bool,
    pub mean_error: f64,
    pub max_error: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub polished: bool,
    /// `max_j |q(t_j) - sign(a_j)|` at the true spikes.
    pub sign_interp_error: f64,
    /// Error message when the pipeline failed.
    pub failure: Option<String>,
}

/// Aggregate over the trials at one cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub fc: usize,
    pub trials: usize,
    pub successes: usize,
    pub average_error: f64,
    pub max_error: f64,
    pub max_gap: f64,
    pub mean_iterations: f64,
    pub max_sign_interp_error: f64,
    pub reference_average: Option<f64>,
    pub reference_max: Option<f64>,
}

fn recovery_trial(fc: usize, trial: usize, seed: u64, opts: &SdpOptions) -> RecoveryTrial {
    let k = (fc / 4).max(1);
    let mut rng = trial_rng(seed ^ (fc as u64) << 32, trial as u64);
    let mut base = RecoveryTrial {
        fc,
        trial,
        spikes: k,
        recovered_spikes: 0,
        complete: false,
        mean_error: f64::NAN,
        max_error: f64::NAN,
        duality_gap: f64::NAN,
        iterations: 0,
        polished: false,
        sign_interp_error: f64::NAN,
        failure: None,
    };
    let x = match random_separated_support(&mut rng, k, 2.0 / fc as f64)
        .and_then(|t| AtomicMeasure::new_1d(t, random_phases(&mut rng, k)))
    {
        Ok(x) => x,
        Err(e) => {
            base.failure = Some(e.to_string());
            return base;
        }
    };
    let y = model::sample_spikes(&x, fc);
    match sdp::tv_superresolve(&y, opts, Some(&x)) {
        Ok(r) => {
            let m = r.support_errors.as_ref().expect("truth supplied");
            base.recovered_spikes = r.measure.len();
            base.complete = m.is_complete();
            base.mean_error = m.mean_error();
            base.max_error = m.max_error();
            base.duality_gap = r.duality_gap;
            base.iterations = r.iterations;
            base.polished = r.polished;
            base.sign_interp_error = x
                .locations_1d()
                .iter()
                .zip(x.amplitudes())
                .map(|(&t, a)| (fourier::eval_trig_poly(&r.c, fc, t)[0] - a / a.norm()).norm())
                .fold(0.0, f64::max);
        }
        Err(e) => base.failure = Some(e.to_string()),
    }
    base
}

/// Exact-recovery benchmark: for each cutoff, `trials` random measures with
/// `floor(fc/4)` spikes at separation `2/fc`, recovered through the SDP.
pub fn benchmark_exact_recovery(
    fc_list: &[usize],
    trials: usize,
    seed: u64,
    opts: &SdpOptions,
) -> (Vec<BenchmarkRow>, Vec<RecoveryTrial>) {
    let jobs: Vec<(usize, usize)> = fc_list
        .iter()
        .flat_map(|&fc| (0..trials).map(move |t| (fc, t)))
        .collect();
    let records: Vec<RecoveryTrial> = jobs
        .par_iter()
        .map(|&(fc, t)| recovery_trial(fc, t, seed, opts))
        .collect();
    let mut rows = Vec::new();
    if trials == 0 {
        return (rows, records);
    }
    for &fc in fc_list {
        let rs: Vec<&RecoveryTrial> = records.iter().filter(|r| r.fc == fc).collect();
        let ok: Vec<&&RecoveryTrial> = rs.iter().filter(|r| r.complete && r.failure.is_none()).collect();
        // failed trials poison the statistics instead of vanishing from them
        let all_ok = ok.len() == rs.len();
        let nan_if = |v: f64| if all_ok { v } else { f64::NAN };
        let reference = REFERENCE_SUPPORT_ERRORS.iter().find(|r| r.0 == fc);
        rows.push(BenchmarkRow {
            fc,
            trials: rs.len(),
            successes: ok.len(),
            average_error: nan_if(ok.iter().map(|r| r.mean_error).sum::<f64>() / ok.len().max(1) as f64),
            max_error: nan_if(ok.iter().map(|r| r.max_error).fold(0.0, f64::max)),
            max_gap: nan_if(ok.iter().map(|r| r.duality_gap).fold(0.0, f64::max)),
            mean_iterations: rs.iter().map(|r| r.iterations as f64).sum::<f64>() / rs.len() as f64,
            max_sign_interp_error: nan_if(ok.iter().map(|r| r.sign_interp_error).fold(0.0, f64::max)),
            reference_average: reference.map(|r| r.1),
            reference_max: reference.map(|r| r.2),
        });
    }
    (rows, records)
}

pub fn benchmark_csv(rows: &[BenchmarkRow]) -> String {
    let mut s = String::from(
        "fc,trials,successes,average_error,max_error,max_gap,mean_iterations,max_sign_interp_error,reference_average,reference_max\n",
    );
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
    for r in rows {
        s += &format!(
            "{},{},{},{:e},{:e},{:e},{},{:e},{},{}\n",
            r.fc,
            r.trials,
            r.successes,
            r.average_error,
            r.max_error,
            r.max_gap,
            r.mean_iterations,
            r.max_sign_interp_error,
            opt(r.reference_average),
            opt(r.reference_max)
        );
    }
    s
}

/// One draw of the random-data study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomYTrial {
    pub trial: usize,
    pub cardinality: usize,
    pub root_count: usize,
    pub duality_gap: f64,
    pub iterations: usize,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomYStudy {
    pub n: usize,
    /// Support cardinality to number of draws.
    pub histogram: BTreeMap<usize, usize>,
    pub trials: Vec<RandomYTrial>,
    pub max_gap: f64,
    /// Largest support seen; never above `n - 1`.
    pub max_cardinality: usize,
}

/// i.i.d. standard complex Gaussian samples.
pub fn random_gaussian_samples<R: Rng>(rng: &mut R, fc: usize) -> SampleVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let coeffs = (0..2 * fc + 1)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        })
        .collect();
    SampleVector::new(1, fc, coeffs).expect("consistent length")
}

/// Runs the pipeline on `trials` Gaussian data vectors of length `n`.
pub fn random_y_study(n: usize, trials: usize, seed: u64, opts: &SdpOptions) -> Result<RandomYStudy> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidInput(format!("n must be odd and at least 3, got {n}")));
    }
    let fc = (n - 1) / 2;
    let records: Vec<RandomYTrial> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let y = random_gaussian_samples(&mut rng, fc);
            match sdp::tv_superresolve(&y, opts, None) {
                Ok(r) => RandomYTrial {
                    trial,
                    cardinality: r.measure.len(),
                    root_count: r.root_count,
                    duality_gap: r.duality_gap,
                    iterations: r.iterations,
                    failure: None,
                },
                Err(e) => RandomYTrial {
                    trial,
                    cardinality: 0,
                    root_count: 0,
                    duality_gap: f64::NAN,
                    iterations: 0,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut histogram = BTreeMap::new();
    for r in records.iter().filter(|r| r.failure.is_none()) {
        *histogram.entry(r.cardinality).or_insert(0) += 1;
    }
    let max_gap = records
        .iter()
        .map(|r| if r.failure.is_some() { f64::INFINITY } else { r.duality_gap })
        .fold(0.0, f64::max);
    let max_cardinality = records.iter().map(|r| r.cardinality).max().unwrap_or(0);
    if max_cardinality > n - 1 {
        return Err(Error::InvalidInput(format!(
            "support of size {max_cardinality} exceeds n - 1 = {}",
            n - 1
        )));
    }
    Ok(RandomYStudy {
        n,
        histogram,
        trials: records,
        max_gap,
        max_cardinality,
    })
}

/// Gram matrix of the partial-DFT columns on `support` (real, since the band
/// is symmetric).
fn column_gram(n_grid: usize, n: usize, support: &[usize]) -> DMatrix<f64> {
    let k = support.len();
    DMatrix::from_fn(k, k, |i, j| {
        n_grid as f64 * dirichlet(n_grid, n, support[i] as i64 - support[j] as i64)
    })
}

fn gram_condition(g: DMatrix<f64>) -> f64 {
    let e = SymmetricEigen::new(g).eigenvalues;
    let hi = e.max();
    let lo = e.min().max(0.0);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        (hi / lo).sqrt()
    }
}

/// Greedy worst-case support: `k` grid points at wrap-around separation at
/// least `delta_grid`, each new point chosen to make the selected columns of
/// the partial DFT as ill-conditioned as possible. The first pair is the most
/// ill-conditioned admissible pair, placed at index 0; ties go to the smallest
/// index.
pub fn adversarial_support(n_grid: usize, fc: usize, k: usize, delta_grid: usize) -> Result<Vec<usize>> {
    let n = 2 * fc + 1;
    let sep = delta_grid.max(1);
    if k == 0 || (k > 1 && k * sep >= n_grid) {
        return Err(Error::InfeasiblePacking {
            k,
            separation: delta_grid,
            n_grid,
        });
    }
    let mut support = vec![0usize];
    if k == 1 {
        return Ok(support);
    }
    // by translation invariance the pair only depends on its distance
    let mut best = (f64::NEG_INFINITY, sep);
    for d in sep..=n_grid / 2 {
        let c = gram_condition(column_gram(n_grid, n, &[0, d]));
        if c > best.0 {
            best = (c, d);
        }
    }
    support.push(best.1);
    while support.len() < k {
        let mut best: Option<(f64, usize)> = None;
        for cand in 0..n_grid {
            if support.iter().any(|&s| grid_distance(n_grid, s, cand) < sep) {
                continue;
            }
            let mut trial = support.clone();
            trial.push(cand);
            let c = gram_condition(column_gram(n_grid, n, &trial));
            if best.is_none_or(|b| c > b.0) {
                best = Some((c, cand));
            }
        }
        match best {
            Some((_, cand)) => support.push(cand),
            None => {
                return Err(Error::InfeasiblePacking {
                    k,
                    separation: delta_grid,
                    n_grid,
                })
            }
        }
    }
    support.sort_unstable();
    Ok(support)
}

/// Condition number of the partial-DFT columns on `support`.
pub fn support_condition(n_grid: usize, fc: usize, support: &[usize]) -> f64 {
    gram_condition(column_gram(n_grid, 2 * fc + 1, support))
}

/// Unit-norm signal on `support` along the smallest right singular vector of
/// the restricted partial DFT.
pub fn adversarial_signal(n_grid: usize, fc: usize, support: &[usize]) -> Result<Vec<Complex64>> {
    if support.len() > 2 * fc + 1 {
        return Err(Error::InvalidInput("support larger than the number of samples".into()));
    }
    if support.iter().any(|&j| j >= n_grid) {
        return Err(Error::InvalidInput("support index out of range".into()));
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n_grid];
    if support.is_empty() {
        return Ok(x);
    }
    let a = restricted_matrix(n_grid, fc, support);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    // normalize the global phase so the largest entry is real and positive
    let v: Vec<Complex64> = (0..support.len()).map(|j| v_t[(imin, j)].conj()).collect();
    let big = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("nonempty");
    let rot = big.conj() / big.norm();
    for (j, &s) in support.iter().enumerate() {
        x[s] = v[j] * rot;
    }
    Ok(x)
}

/// Smallest singular value of `n_rows` consecutive rows of the DFT, scaled
/// by `1/sqrt(n_rows)`, restricted to the columns `support`.
pub fn band_min_singular_value(n_grid: usize, n_rows: usize, support: &[usize]) -> f64 {
    let scale = 1.0 / (n_rows as f64).sqrt();
    let a = DMatrix::from_fn(n_rows, support.len(), |k, j| {
        Complex64::from_polar(scale, -2.0 * PI * (k * support[j]) as f64 / n_grid as f64)
    });
    a.singular_values().min()
}

/// Relative l2 error.
pub fn normalized_error(estimate: &[Complex64], truth: &[Complex64]) -> f64 {
    let num: f64 = estimate.iter().zip(truth).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = truth.iter().map(|v| v.norm_sqr()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Builds the adversarial instance at separation `delta_grid`, randomly
/// shifted and phase-rotated, and tries basis pursuit on it.
pub fn adversarial_trial(
    geometry: &Geometry,
    k: usize,
    delta_grid: usize,
    seed: u64,
    opts: &L1Options,
) -> Result<PhasePoint> {
    let n_grid = geometry.n_grid();
    let fc = geometry.fc();
    let mut rng = trial_rng(seed, delta_grid as u64);
    let shift = rng.random_range(0..n_grid);
    let phase = Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>());
    let support: Vec<usize> = adversarial_support(n_grid, fc, k, delta_grid)?
        .into_iter()
        .map(|s| (s + shift) % n_grid)
        .collect();
    let x: Vec<Complex64> = adversarial_signal(n_grid, fc, &support)?
        .into_iter()
        .map(|v| v * phase)
        .collect();
    let y = model::sample_discrete(&x, fc)?;
    let err = match discrete::basis_pursuit_against(&y, geometry, opts, discrete::l1_norm(&x)) {
        Ok(BpVerdict::Solved(sol)) => normalized_error(&sol.x, &x),
        Ok(BpVerdict::Beaten { .. }) => f64::INFINITY,
        Err(Error::NonConvergence { .. }) => {
            log::warn!("undecided instance at separation {delta_grid}, counted as a failure");
            f64::INFINITY
        }
        Err(e) => return Err(e),
    };
    Ok(PhasePoint::new(geometry.srf(), k, delta_grid, err))
}

/// Result of the separation search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalDistance {
    pub srf: f64,
    pub k: usize,
    /// Smallest separation (grid units) at which recovery succeeded.
    pub delta_star: usize,
    /// Every separation tried, in order.
    pub trace: Vec<PhasePoint>,
    /// Whether success was monotone in the separation along the trace.
    pub monotone: bool,
}

/// Binary search for the smallest separation at which the adversarial
/// instance is recovered.
pub fn critical_distance(geometry: &Geometry, k: usize, seed: u64, opts: &L1Options) -> Result<CriticalDistance> {
    let srf = geometry.srf();
    let mut trace = Vec::new();
    if k <= 1 {
        let p = adversarial_trial(geometry, 1, 0, seed, opts)?;
        let ok = p.success;
        trace.push(p);
        return Ok(CriticalDistance {
            srf,
            k,
            delta_star: if ok { 0 } else { usize::MAX },
            trace,
            monotone: true,
        });
    }
    let n_grid = geometry.n_grid();
    let cap = (n_grid - 1) / k;
    let mut hi = ((4.0 * srf).ceil() as usize).clamp(1, cap);
    // grow the bracket until the upper end succeeds
    loop {
        let p = adversarial_trial(geometry, k, hi, seed, opts)?;
        trace.push(p);
        if p.success {
            break;
        }
        if hi == cap {
            return Ok(CriticalDistance {
                srf,
                k,
                delta_star: usize::MAX,
                trace,
                monotone: true,
            });
        }
        hi = (2 * hi).min(cap);
    }
    let mut lo = 0usize; // treated as a failure
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let p = adversarial_trial(geometry, k, mid, seed, opts)?;
        trace.push(p);
        if p.success {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut sorted = trace.clone();
    sorted.sort_by_key(|p| p.delta_grid);
    let first = sorted.iter().position(|p| p.success).unwrap_or(sorted.len());
    let monotone = sorted[first..].iter().all(|p| p.success);
    if !monotone {
        log::warn!("non-monotone trace for k = {k}, SRF = {srf:.3}, seed = {seed}");
    }
    Ok(CriticalDistance {
        srf,
        k,
        delta_star: hi,
        trace,
        monotone,
    })
}

/// One noisy recovery for the stability sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityTrial {
    pub srf: f64,
    pub delta: f64,
    pub trial: usize,
    pub spikes: usize,
    /// `||x_hat - x||_1`.
    pub error: f64,
    pub bound: f64,
    /// `||P_n (x_hat - x)||_1`, at most `2 delta`.
    pub lowpass_error: f64,
    pub iterations: usize,
}

/// Random separated grid signal (separation `2.5 lambda_c`) observed through
/// low-pass noise of l1 norm `delta` that mimics a one-sample shift of the
/// signal, then recovered by the relaxed l1 program.
pub fn stability_trial(
    geometry: &Geometry,
    spikes: usize,
    delta: f64,
    seed: u64,
    trial: usize,
    opts: &L1Options,
) -> Result<StabilityTrial> {
    let n_grid = geometry.n_grid();
    let fc = geometry.fc();
    let sep = (2.5 * n_grid as f64 / fc as f64).ceil() as usize;
    let mut rng = trial_rng(seed, trial as u64);
    let support = random_separated_grid_support(&mut rng, n_grid, spikes, sep)?;
    let amps = random_phases(&mut rng, spikes);
    let mut x = vec![Complex64::new(0.0, 0.0); n_grid];
    for (&j, &a) in support.iter().zip(&amps) {
        x[j] = a;
    }
    let op = PartialDft::new(n_grid, fc);
    let px = op.lowpass(&x);
    let mut z = vec![Complex64::new(0.0, 0.0); n_grid];
    for i in 0..n_grid {
        z[i] = x[(i + n_grid - 1) % n_grid] - x[i];
    }
    let pz = op.lowpass(&z);
    let scale = if delta > 0.0 { delta / discrete::l1_norm(&pz) } else { 0.0 };
    let s: Vec<Complex64> = px.iter().zip(&pz).map(|(a, b)| a + b * scale).collect();
    let sol = discrete::noisy_l1(&s, geometry, delta, opts)?;
    let h: Vec<Complex64> = sol.x.iter().zip(&x).map(|(a, b)| a - b).collect();
    let bound = discrete::stability_bound(geometry.srf(), delta)?;
    Ok(StabilityTrial {
        srf: geometry.srf(),
        delta,
        trial,
        spikes,
        error: discrete::l1_norm(&h),
        bound,
        lowpass_error: discrete::l1_norm(&op.lowpass(&h)),
        iterations: sol.iterations,
    })
}

/// Recovered jumps of a piecewise-smooth function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseResult {
    pub smoothness: usize,
    /// Sorted breakpoints in `[0, 1)`.
    pub breakpoints: Vec<f64>,
    /// Jump of the `smoothness`-th derivative at each breakpoint.
    pub jumps: Vec<f64>,
    /// Constant value on `[breakpoints[i], breakpoints[i+1])` (wrapping), for
    /// piecewise-constant input.
    pub levels: Option<Vec<f64>>,
    pub mean: f64,
    pub duality_gap: f64,
}

impl PiecewiseResult {
    /// Value at `t` for piecewise-constant input.
    pub fn level_at(&self, t: f64) -> Result<f64> {
        let levels = self
            .levels
            .as_ref()
            .ok_or_else(|| Error::NotImplemented("reconstruction of smooth pieces".into()))?;
        if self.breakpoints.is_empty() {
            return Ok(levels[0]);
        }
        let t = model::wrap_unit(t);
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        let m = self.breakpoints.len();
        Ok(levels[(idx + m - 1) % m])
    }
}

/// Fourier coefficients of the 1-periodic piecewise-constant function taking
/// `levels[i]` on `[breaks[i], breaks[i+1])` (wrapping).
pub fn step_function_samples(breaks: &[f64], levels: &[f64], fc: usize) -> Result<SampleVector> {
    if breaks.len() != levels.len() || breaks.is_empty() {
        return Err(Error::InvalidInput("need one level per breakpoint".into()));
    }
    let m = breaks.len();
    let mut coeffs = Vec::with_capacity(2 * fc + 1);
    for k in -(fc as i64)..=fc as i64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..m {
            let a = breaks[i];
            let mut b = breaks[(i + 1) % m];
            if b <= a {
                b += 1.0;
            }
            if k == 0 {
                acc += levels[i] * (b - a);
            } else {
                let w = -2.0 * PI * k as f64;
                let e = |t: f64| Complex64::from_polar(1.0, w * t);
                acc += (e(b) - e(a)) * levels[i] / Complex64::new(0.0, w);
            }
        }
        coeffs.push(acc);
    }
    SampleVector::new(1, fc, coeffs)
}

/// Recovers the jump set of the `smoothness`-th derivative from the samples
/// of a piecewise-smooth periodic function; levels are rebuilt for
/// piecewise-constant input.
pub fn piecewise_recover(y: &SampleVector, smoothness: usize, opts: &SdpOptions) -> Result<PiecewiseResult> {
    if y.dim() != 1 {
        return Err(Error::InvalidInput("piecewise recovery is 1-D".into()));
    }
    let fc = y.fc();
    let p = (smoothness + 1) as i32;
    let coeffs: Vec<Complex64> = (-(fc as i64)..=fc as i64)
        .map(|k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, 2.0 * PI * k as f64).powi(p) * y.at(k)
            }
        })
        .collect();
    let dy = SampleVector::new(1, fc, coeffs)?;
    let mean = y.at(0).re;
    let r = sdp::tv_superresolve(&dy, opts, None)?;
    let breakpoints = r.measure.locations_1d().to_vec();
    let jumps: Vec<f64> = r.measure.amplitudes().iter().map(|a| a.re).collect();
    let levels = if smoothness == 0 {
        let m = breakpoints.len();
        if m == 0 {
            Some(vec![mean])
        } else {
            // cumulative jumps from an unknown base level, then fix the base
            // so the mean matches the zero-frequency sample
            let mut rel = Vec::with_capacity(m);
            let mut acc = 0.0;
            let mut weighted = 0.0;
            for i in 0..m {
                acc += jumps[i];
                rel.push(acc);
                let mut len = breakpoints[(i + 1) % m] - breakpoints[i];
                if len <= 0.0 {
                    len += 1.0;
                }
                weighted += acc * len;
            }
            let base = mean - weighted;
            Some(rel.into_iter().map(|v| v + base).collect())
        }
    } else {
        None
    };
    Ok(PiecewiseResult {
        smoothness,
        breakpoints,
        jumps,
        levels,
        mean,
        duality_gap: r.duality_gap,
    })
}

/// Support errors of a recovered measure against the truth, as a plain list.
pub fn location_errors(estimate: &AtomicMeasure, truth: &AtomicMeasure) -> Vec<f64> {
    let m = match_locations(estimate.locations(), truth.locations());
    m.pairs.iter().map(|p| p.2).collect()
}

/// Convenience for experiments that only need 1-D locations.
pub fn locations_of(x: &AtomicMeasure) -> Vec<f64> {
    match x.locations() {
        Locations::OneD(v) => v.clone(),
        Locations::TwoD(_) => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tight_supports_hit_the_separation() {
        let mut rng = trial_rng(3, 0);
        for k in [2, 5, 40] {
            let t = random_tight_support(&mut rng, k, 0.02).unwrap();
            assert_eq!(t.len(), k);
            assert!((model::min_separation(&t).unwrap() - 0.02).abs() < 1e-12);
        }
        let p = random_tight_support_2d(&mut rng, 10, 0.01, 0.05).unwrap();
        assert!((model::min_separation_2d(&p).unwrap() - 0.01).abs() < 1e-12);
        assert!(random_tight_support(&mut rng, 60, 0.02).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| trial_rng(7, 3).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| trial_rng(7, 3).random()).collect();
        assert_eq!(a, b);
        let c: u64 = trial_rng(7, 4).random();
        assert_ne!(a[0], c);
    }

    #[test]
    fn separated_supports() {
        let mut rng = trial_rng(1, 0);
        let t = random_separated_support(&mut rng, 12, 0.04).unwrap();
        assert!(model::min_separation(&t).unwrap() >= 0.04);
        let g = random_separated_grid_support(&mut rng, 256, 10, 20).unwrap();
        for i in 0..g.len() {
            for j in 0..i {
                assert!(grid_distance(256, g[i], g[j]) >= 20);
            }
        }
        assert!(random_separated_support(&mut rng, 10, 0.1).is_err());
    }

    #[test]
    fn adversarial_single_and_pair() {
        assert_eq!(adversarial_support(64, 8, 1, 4).unwrap(), vec![0]);
        let s = adversarial_support(128, 8, 2, 5).unwrap();
        let best = support_condition(128, 8, &s);
        for a in 0..128 {
            for b in a + 5..128 {
                if 128 - (b - a) >= 5 {
                    assert!(support_condition(128, 8, &[a, b]) <= best * (1.0 + 1e-9));
                }
            }
        }
        let x = adversarial_signal(64, 8, &[5]).unwrap();
        assert!((x[5] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(adversarial_support(64, 8, 9, 8).is_err());
    }

    #[test]
    fn smallest_singular_value_matches_gram() {
        let support: Vec<usize> = (100..108).collect();
        let s = band_min_singular_value(512, 128, &support);
        let g = DMatrix::from_fn(8, 8, |i, j| {
            (0..128)
                .map(|k| Complex64::from_polar(1.0 / 128.0, 2.0 * PI * (k as f64) * (i as f64 - j as f64) / 512.0))
                .sum::<Complex64>()
        });
        let e = g.symmetric_eigenvalues();
        let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((s * s - lo).abs() < 1e-10);
    }

    #[test]
    fn piecewise_constant_and_trivial() {
        let y = step_function_samples(&[0.3, 0.7], &[1.0, -1.0], 20).unwrap();
        let r = piecewise_recover(&y, 0, &SdpOptions::default()).unwrap();
        assert_eq!(r.breakpoints.len(), 2);
        assert!((r.breakpoints[0] - 0.3).abs() < 1e-6 && (r.breakpoints[1] - 0.7).abs() < 1e-6);
        assert!((r.level_at(0.5).unwrap() - 1.0).abs() < 1e-6);
        assert!((r.level_at(0.9).unwrap() + 1.0).abs() < 1e-6);
        let mut c = vec![Complex64::new(0.0, 0.0); 41];
        c[20] = Complex64::new(0.25, 0.0);
        let r = piecewise_recover(&SampleVector::new(1, 20, c).unwrap(), 0, &SdpOptions::default()).unwrap();
        assert!(r.breakpoints.is_empty());
        assert_eq!(r.level_at(0.1).unwrap(), 0.25);
    }

    #[test]
    fn empty_benchmark() {
        let (rows, recs) = benchmark_exact_recovery(&[50], 0, 1, &SdpOptions::default());
        assert!(rows.is_empty() && recs.is_empty());
    }
}
