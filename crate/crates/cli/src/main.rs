//! `superres`: command-line front end.
//!
//! Exit codes: 0 success, 2 degenerate dual solution, 3 solver did not
//! converge, 4 invalid input (including unreadable files and bad flags).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use superres_core::certificate::{self, CertReport};
use superres_core::discrete::{self, L1Options};
use superres_core::harness;
use superres_core::io::{self, ComplexListJson, GridVectorJson, MeasureJson, SamplesJson};
use superres_core::kernel::{tail_sum_table, tail_table_csv};
use superres_core::model::{self, lowpass_curve};
use superres_core::sdp::{self, SdpOptions};
use superres_core::slepian;
use superres_core::{Error, Geometry, KernelSpec, Locations};

#[derive(Parser, Debug)]
#[command(name = "superres", version, about = "Super-resolution by total-variation minimization")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed of the experiment random streams.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for trial-level parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write the JSON result to this file.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
    /// Write plot-ready CSV to this file.
    #[arg(long, global = true)]
    csv_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random separated spike train and its low-frequency samples.
    Simulate {
        #[arg(long)]
        fc: usize,
        /// Number of spikes.
        #[arg(long)]
        spikes: usize,
        /// Minimum separation in units of 1/fc.
        #[arg(long, default_value_t = 2.0)]
        min_sep: f64,
        /// Ground-truth measure (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Samples (JSON).
        #[arg(long)]
        samples: PathBuf,
    },
    /// Recover a spike train from its samples by the semidefinite program.
    Solve {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Ground truth for support-error statistics.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Skip the joint Newton refinement.
        #[arg(long)]
        no_polish: bool,
    },
    /// Noiseless recovery on a grid by l1 minimization.
    Bp {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long = "N")]
        n_grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Noisy recovery on a grid: min l1 subject to a low-pass l1 budget.
    Denoise {
        /// Length-N signal (JSON grid vector).
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        fc: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and verify a dual certificate for a support and sign pattern.
    Certify {
        /// Measure JSON whose locations are the support (amplitudes ignored
        /// when a pattern is given).
        #[arg(long)]
        support: PathBuf,
        /// Sign pattern `{"re": [...], "im": [...]}`; defaults to the phases
        /// of the support file's amplitudes.
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[arg(long)]
        fc: usize,
        /// Grid points per wavelength 1/fc.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Write `t,abs_q` samples of the certificate (1-D only).
        #[arg(long)]
        emit_curve: Option<PathBuf>,
    },
    /// Neighbor-sum bounds of the interpolation kernel.
    KernelTable {
        #[arg(long, default_value_t = 128)]
        fc: usize,
        /// Separation in units of 1/fc.
        #[arg(long, default_value_t = 1.98)]
        delta: f64,
        /// Offsets in units of 1/fc.
        #[arg(long, value_delimiter = ',', default_value = "0,0.1649,0.4269,0.7559")]
        t: Vec<f64>,
    },
    /// Eigenvalues of the time-band-limiting operator.
    Slepian {
        #[arg(long = "N", default_value_t = 4096)]
        n_grid: usize,
        #[arg(long, default_value_t = 48)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        srf: Vec<usize>,
    },
    /// Critical separation of adversarial grid instances.
    Phase {
        #[arg(long = "N", default_value_t = 4096)]
        n_grid: usize,
        #[arg(long, value_delimiter = ',', default_value = "8")]
        srf: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "2,5,10")]
        k: Vec<usize>,
    },
    /// Exact-recovery benchmark over cutoff frequencies.
    BenchTable3 {
        #[arg(long, value_delimiter = ',', default_value = "25,50,75,100")]
        fc: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Run the pipeline on Gaussian data.
    RandomY {
        #[arg(long, default_value_t = 101)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Jump detection for piecewise-smooth periodic functions.
    Piecewise {
        #[arg(long)]
        samples: PathBuf,
        /// Order of the first discontinuous derivative.
        #[arg(long, default_value_t = 0)]
        smoothness: usize,
    },
}

enum Failure {
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult = Result<(), Failure>;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Degenerate => 2,
        Error::NonConvergence { .. } => 3,
        _ => 4,
    }
}

/// Prints the JSON result and mirrors it to `--json-out`.
fn emit_json<T: Serialize>(g: &Global, value: &T) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    println!("{text}");
    if let Some(p) = &g.json_out {
        io::write_text(p, &(text + "\n"))?;
    }
    Ok(())
}

fn emit_csv(g: &Global, csv: &str) -> CliResult {
    if let Some(p) = &g.csv_out {
        io::write_text(p, csv)?;
    }
    Ok(())
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

fn simulate(g: &Global, fc: usize, spikes: usize, min_sep: f64, out: &Path, samples: &Path) -> CliResult {
    let (x, y) = harness::simulate(fc, spikes, min_sep, g.seed)?;
    io::write_json(out, &MeasureJson::from_measure(&x))?;
    io::write_json(samples, &SamplesJson::from_samples(&y))?;
    emit_csv(g, &lowpass_curve(&y, 64 * (2 * fc + 1))?.to_csv())?;
    emit_json(
        g,
        &json!({
            "fc": fc,
            "spikes": x.len(),
            "min_separation": model::min_separation(x.locations_1d())?,
            "seed": g.seed,
        }),
    )
}

fn solve(g: &Global, samples: &Path, opts: SdpOptions, out: &Path, truth: Option<&Path>) -> CliResult {
    let y = io::read_samples(samples)?;
    let truth = truth.map(io::read_measure).transpose()?;
    let r = match sdp::tv_superresolve(&y, &opts, truth.as_ref()) {
        Err(Error::Degenerate) => {
            eprintln!(
                "hint: for positive measures the dual optimum can be degenerate; re-running on y with a \
                 small random phase perturbation is a useful diagnostic"
            );
            return Err(Error::Degenerate.into());
        }
        other => other?,
    };
    io::write_json(out, &MeasureJson::from_measure(&r.measure))?;
    if !r.c.is_empty() {
        let m = 64 * (2 * y.fc() + 1);
        let q = superres_core::fourier::eval_trig_poly_grid(&r.c, y.fc(), m);
        let mut csv = String::from("t,re,im\n");
        for (i, v) in q.iter().enumerate() {
            let _ = writeln!(csv, "{},{:e},{:e}", i as f64 / m as f64, v.re, v.im);
        }
        emit_csv(g, &csv)?;
    }
    let errors = r.support_errors.as_ref().map(|m| {
        json!({
            "complete": m.is_complete(),
            "mean_error": finite_or_null(m.mean_error()),
            "max_error": finite_or_null(m.max_error()),
            "unmatched_estimates": m.unmatched_estimates,
            "unmatched_truth": m.unmatched_truth,
        })
    });
    emit_json(
        g,
        &json!({
            "spikes": r.measure.len(),
            "iterations": r.iterations,
            "primal_residual": r.primal_residual,
            "dual_residual": r.dual_residual,
            "duality_gap": r.duality_gap,
            "dual_objective": r.dual_objective,
            "residual": r.residual,
            "root_count": r.root_count,
            "polished": r.polished,
            "support_errors": errors,
        }),
    )
}

fn grid_output(g: &Global, sol: &discrete::L1Solution, out: Option<&Path>) -> CliResult {
    let v = GridVectorJson::from_vector(&sol.x);
    if let Some(p) = out {
        io::write_json(p, &v)?;
    }
    let mut csv = String::from("index,re,im\n");
    for (i, x) in sol.x.iter().enumerate() {
        let _ = writeln!(csv, "{i},{:e},{:e}", x.re, x.im);
    }
    emit_csv(g, &csv)?;
    emit_json(
        g,
        &json!({
            "vector": v,
            "nonzeros": v.support.as_ref().map_or(0, |s| s.len()),
            "iterations": sol.iterations,
            "primal_residual": sol.primal_residual,
            "dual_residual": sol.dual_residual,
            "certified": sol.certified,
        }),
    )
}

fn bp(g: &Global, samples: &Path, n_grid: usize, out: Option<&Path>) -> CliResult {
    let y = io::read_samples(samples)?;
    let geometry = Geometry::new(n_grid, y.fc())?;
    let sol = discrete::basis_pursuit(&y, &geometry, &L1Options::default())?;
    grid_output(g, &sol, out)
}

fn denoise(g: &Global, signal: &Path, delta: f64, fc: usize, out: Option<&Path>) -> CliResult {
    let s = io::read_json::<GridVectorJson>(signal)?.into_vector()?;
    let geometry = Geometry::new(s.len(), fc)?;
    let sol = discrete::noisy_l1(&s, &geometry, delta, &L1Options::default())?;
    grid_output(g, &sol, out)
}

fn certify(
    g: &Global,
    support: &Path,
    pattern: Option<&Path>,
    fc: usize,
    grid: usize,
    emit_curve: Option<&Path>,
) -> CliResult {
    let file: MeasureJson = io::read_json(support)?;
    let pattern: Vec<Complex64> = match pattern {
        Some(p) => io::read_json::<ComplexListJson>(p)?.into_values()?,
        None => file
            .amplitudes()?
            .into_iter()
            .map(|a| if a.norm() > 0.0 { a / a.norm() } else { a })
            .collect(),
    };
    let spec = KernelSpec::new(fc)?;
    let report: CertReport = match &file.locations {
        Locations::OneD(t) => {
            let cert = certificate::build_certificate(t, &pattern, &spec)?;
            if let Some(p) = emit_curve {
                let curve = certificate::certificate_curve(&cert, grid * fc)?;
                let mut csv = String::from("t,abs_q\n");
                for (t, v) in curve.t.iter().zip(&curve.values) {
                    let _ = writeln!(csv, "{t},{:e}", v.norm());
                }
                io::write_text(p, &csv)?;
            }
            certificate::verify_certificate(&cert, grid, true)?
        }
        Locations::TwoD(r) => {
            if emit_curve.is_some() {
                return Err(Failure::Usage("--emit-curve is only available in 1-D".into()));
            }
            let cert = certificate::build_certificate_2d(r, &pattern, &spec)?;
            certificate::verify_certificate_2d(&cert, grid)?
        }
    };
    emit_json(g, &report)
}

fn kernel_table(g: &Global, fc: usize, delta: f64, t: &[f64]) -> CliResult {
    let spec = KernelSpec::new(fc)?;
    let rows = tail_sum_table(&spec, delta, t)?;
    let csv = tail_table_csv(&rows);
    if g.csv_out.is_none() {
        print!("{csv}");
    }
    emit_csv(g, &csv)?;
    if let Some(p) = &g.json_out {
        io::write_json(p, &rows)?;
    }
    Ok(())
}

fn slepian_cmd(g: &Global, n_grid: usize, k: usize, srfs: &[usize]) -> CliResult {
    let mut csv = String::from("srf,index,eigenvalue,below_floor\n");
    let mut summary = Vec::new();
    for &srf in srfs {
        if srf == 0 || n_grid % srf != 0 {
            return Err(Failure::Usage(format!("SRF {srf} must divide N = {n_grid}")));
        }
        let s = slepian::timeband_spectrum(n_grid, n_grid / srf, k)?;
        for (i, (v, f)) in s.raw.iter().zip(&s.below_floor).enumerate() {
            let _ = writeln!(csv, "{srf},{i},{v:e},{f}");
        }
        let w = 1.0 / (2.0 * srf as f64);
        let asymptotic = slepian::asymptotic_lambda(k, k, w).ok();
        summary.push(json!({
            "srf": srf,
            "cluster_count": slepian::cluster_count(&s.raw, 0.5),
            "floor_count": s.floor_count(),
            "at_most_1e-12": s.count_at_most(1e-12),
            "smallest": s.raw.last(),
            "asymptotic_log10_smallest": asymptotic.map(|a| a.log10_lambda),
        }));
    }
    emit_csv(g, &csv)?;
    emit_json(g, &json!({ "N": n_grid, "k": k, "spectra": summary }))
}

fn phase(g: &Global, n_grid: usize, srfs: &[f64], ks: &[usize]) -> CliResult {
    let mut csv = String::from("srf,k,delta_grid,success,normalized_error\n");
    let mut summary = Vec::new();
    for &srf in srfs {
        let geometry = Geometry::from_srf(n_grid, srf)?;
        for &k in ks {
            let r = harness::critical_distance(&geometry, k, g.seed, &L1Options::default())?;
            let mut trace = r.trace.clone();
            trace.sort_by_key(|p| p.delta_grid);
            for p in &trace {
                let _ = writeln!(csv, "{},{},{},{},{:e}", p.srf, p.k, p.delta_grid, p.success, p.normalized_error);
            }
            summary.push(json!({
                "srf": r.srf,
                "k": k,
                "delta_star": if r.delta_star == usize::MAX { None } else { Some(r.delta_star) },
                "delta_star_over_srf": r.delta_star as f64 / r.srf,
                "monotone": r.monotone,
                "probes": r.trace.len(),
            }));
        }
    }
    emit_csv(g, &csv)?;
    emit_json(g, &json!({ "N": n_grid, "seed": g.seed, "results": summary }))
}

fn bench_table3(g: &Global, fcs: &[usize], trials: usize) -> CliResult {
    let (rows, records) = harness::benchmark_exact_recovery(fcs, trials, g.seed, &SdpOptions::default());
    emit_csv(g, &harness::benchmark_csv(&rows))?;
    emit_json(g, &json!({ "rows": rows, "trials": records }))
}

fn random_y(g: &Global, n: usize, trials: usize) -> CliResult {
    let study = harness::random_y_study(n, trials, g.seed, &SdpOptions::default())?;
    let mut csv = String::from("cardinality,count\n");
    for (c, k) in &study.histogram {
        let _ = writeln!(csv, "{c},{k}");
    }
    emit_csv(g, &csv)?;
    emit_json(g, &study)
}

fn piecewise(g: &Global, samples: &Path, smoothness: usize) -> CliResult {
    let y = io::read_samples(samples)?;
    let r = harness::piecewise_recover(&y, smoothness, &SdpOptions::default())?;
    if r.levels.is_some() {
        let mut csv = String::from("t,level\n");
        let m = 64 * (2 * y.fc() + 1);
        for i in 0..m {
            let t = i as f64 / m as f64;
            let _ = writeln!(csv, "{t},{:e}", r.level_at(t)?);
        }
        emit_csv(g, &csv)?;
    }
    emit_json(g, &r)
}

fn run(cli: Cli) -> CliResult {
    let g = &cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Simulate { fc, spikes, min_sep, out, samples } => simulate(g, *fc, *spikes, *min_sep, out, samples),
        Command::Solve { samples, tol, max_iter, out, truth, no_polish } => {
            let mut opts = SdpOptions { tol: *tol, polish: !no_polish, ..SdpOptions::default() };
            if let Some(m) = max_iter {
                opts.max_iter = *m;
            }
            solve(g, samples, opts, out, truth.as_deref())
        }
        Command::Bp { samples, n_grid, out } => bp(g, samples, *n_grid, out.as_deref()),
        Command::Denoise { signal, delta, fc, out } => denoise(g, signal, *delta, *fc, out.as_deref()),
        Command::Certify { support, pattern, fc, grid, emit_curve } => {
            certify(g, support, pattern.as_deref(), *fc, *grid, emit_curve.as_deref())
        }
        Command::KernelTable { fc, delta, t } => kernel_table(g, *fc, *delta, t),
        Command::Slepian { n_grid, k, srf } => slepian_cmd(g, *n_grid, *k, srf),
        Command::Phase { n_grid, srf, k } => phase(g, *n_grid, srf, k),
        Command::BenchTable3 { fc, trials } => bench_table3(g, fc, *trials),
        Command::RandomY { n, trials } => random_y(g, *n, *trials),
        Command::Piecewise { samples, smoothness } => piecewise(g, samples, *smoothness),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
