use std::path::{Path, PathBuf};

// stdout may be closed early by a pipe reader; that is not an error here
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tvd::experiments::{monte_carlo_config, run_experiment, Estimator, ExperimentSpec};
use tvd::geometry::{default_edge_tol, WITNESS_C1};
use tvd::matrix::format_f64;
use tvd::partition::partition_count_bound;
use tvd::{
    denoise_notuning, denoise_penalized, gaussian_width_cone, greedy_tv_partition, make_signal, project_tv_ball,
    sign_pattern, witness_estimate, DenoiseResult, ImageMatrix, Result, SignalKind, SolverConfig, TvError,
};

/// Total-variation denoising on 2D grids.
#[derive(Debug, Parser)]
#[command(name = "tvd", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Constrained or penalized TV denoising of a CSV matrix.
    Denoise(DenoiseArgs),
    /// Tuning-free TV denoising of a square CSV matrix.
    TuneFree(TuneFreeArgs),
    /// Monte Carlo risk curve for a synthetic signal.
    Simulate(SimulateArgs),
    /// Greedy quadtree partition of a CSV matrix.
    Partition(PartitionArgs),
    /// Gaussian width of the tangent cone at a synthetic signal.
    Gwidth(GwidthArgs),
    /// Monte Carlo check of the lower-bound witness for the two-piece signal.
    Witness(WitnessArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Constrained,
    Penalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignalArg {
    Two,
    Four,
    Worst,
}

impl From<SignalArg> for SignalKind {
    fn from(s: SignalArg) -> Self {
        match s {
            SignalArg::Two => SignalKind::Two,
            SignalArg::Four => SignalKind::Four,
            SignalArg::Worst => SignalKind::Worst,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Ideal,
    Notuning,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Ideal => Estimator::IdealConstrained,
            EstimatorArg::Notuning => Estimator::Notuning,
        }
    }
}

/// Overrides for the solver settings. Unset values keep the subcommand's
/// defaults.
#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Cap on inner iterations per proximal solve.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Relative accuracy of each proximal solve.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Relative tolerance for matching a TV budget or residual radius.
    #[arg(long)]
    pub bisect_tol: Option<f64>,
    /// Cap on search steps over the penalty.
    #[arg(long)]
    pub max_bisect: Option<usize>,
}

impl SolverArgs {
    fn apply(&self, base: SolverConfig) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            max_iters: self.max_iters.unwrap_or(base.max_iters),
            rel_tol: self.rel_tol.unwrap_or(base.rel_tol),
            bisect_tol: self.bisect_tol.unwrap_or(base.bisect_tol),
            max_bisect: self.max_bisect.unwrap_or(base.max_bisect),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Input matrix (CSV, no header).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Budget on the normalized TV, tv/n for an n×n input; the solver uses
    /// tv ≤ v·n. Required with --mode constrained.
    #[arg(long, conflicts_with = "lambda")]
    pub v: Option<f64>,
    /// Weight on the normalized TV, minimizing ‖y − θ‖² + λ·tv(θ)/n.
    /// Required with --mode penalized.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Take --v and --lambda on the raw edge sum instead (allows non-square
    /// inputs).
    #[arg(long)]
    pub unnormalized: bool,
    /// Output matrix (CSV). On non-convergence the best estimate is still
    /// written here.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct TuneFreeArgs {
    /// Input matrix (CSV, square, no header).
    #[arg(long)]
    pub input: PathBuf,
    /// Output matrix (CSV).
    #[arg(long)]
    pub out: PathBuf,
    /// Optional JSON report with the noise estimate and residual radius.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub signal: SignalArg,
    /// Comma-separated, strictly ascending even sides.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    /// Replicates per side.
    #[arg(long, default_value_t = 30)]
    pub reps: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value = "ideal")]
    pub estimator: EstimatorArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report CSV; the JSON sidecar is written next to it.
    #[arg(long, default_value = "report.csv")]
    pub out: PathBuf,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Input matrix (CSV, no header).
    #[arg(long)]
    pub input: PathBuf,
    /// Per-block TV threshold.
    #[arg(long)]
    pub epsilon: f64,
    /// Output partition (JSON array of rectangles).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GwidthArgs {
    #[arg(long, value_enum)]
    pub signal: SignalArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edges with |Δθ| at most this count as inactive (default: 1e-9 times
    /// max(1, largest entry magnitude)).
    #[arg(long)]
    pub edge_tol: Option<f64>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    /// Side length: an even perfect square.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = WITNESS_C1)]
    pub c1: f64,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Denoise(a) => denoise(a),
        Command::TuneFree(a) => tune_free(a),
        Command::Simulate(a) => with_threads(a.threads, || simulate(&a)),
        Command::Partition(a) => partition(a),
        Command::Gwidth(a) => with_threads(a.threads, || gwidth(&a)),
        Command::Witness(a) => witness(a),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(0) => Err(TvError::Argument("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| TvError::Argument(format!("cannot start {t} threads: {e}")))?
            .install(f),
    }
}

fn print_value(key: &str, value: f64) {
    out!("{key} {}", format_f64(value));
}

fn scale_for(y: &ImageMatrix, unnormalized: bool) -> Result<f64> {
    if unnormalized {
        Ok(1.0)
    } else if y.is_square() {
        Ok(y.rows() as f64)
    } else {
        Err(TvError::Argument(format!(
            "normalized --v/--lambda need a square input, got {}x{} (use --unnormalized)",
            y.rows(),
            y.cols()
        )))
    }
}

fn denoise(a: DenoiseArgs) -> Result<()> {
    let cfg = a.solver.apply(SolverConfig::default())?;
    let y = ImageMatrix::read_csv(&a.input)?;
    let n = scale_for(&y, a.unnormalized)?;
    let result = match (a.mode, a.v, a.lambda) {
        (Mode::Constrained, Some(v), None) => project_tv_ball(&y, v * n, &cfg),
        (Mode::Penalized, None, Some(lambda)) => denoise_penalized(&y, lambda / n, &cfg),
        (Mode::Constrained, _, _) => return Err(TvError::Argument("--mode constrained needs --v".into())),
        (Mode::Penalized, _, _) => return Err(TvError::Argument("--mode penalized needs --lambda".into())),
    };
    let r = result.map_err(|e| save_best(e, &a.out))?;
    r.estimate.write_csv(&a.out)?;
    report_denoise(&r);
    Ok(())
}

fn save_best(err: TvError, out: &Path) -> TvError {
    if let TvError::Convergence { best: Some(best), .. } = &err {
        if best.write_csv(out).is_ok() {
            eprintln!("best estimate written to {}", out.display());
        }
    }
    err
}

fn report_denoise(r: &DenoiseResult) {
    print_value("achieved_tv", r.achieved_tv);
    print_value("residual_norm2", r.residual_norm2);
    out!("iterations {}", r.iterations);
    out!("converged {}", r.converged);
}

#[derive(Serialize)]
struct TuneFreeReport {
    sigma_hat: String,
    radius2: String,
    on_boundary: bool,
    centered_solution_tv: String,
    residual_norm2: String,
    iterations: usize,
}

fn tune_free(a: TuneFreeArgs) -> Result<()> {
    let cfg = a.solver.apply(SolverConfig::default())?;
    let y = ImageMatrix::read_csv(&a.input)?;
    let r = denoise_notuning(&y, &cfg).map_err(|e| save_best(e, &a.out))?;
    r.estimate.write_csv(&a.out)?;
    print_value("sigma_hat", r.sigma_hat);
    print_value("radius2", r.radius2);
    out!("on_boundary {}", r.on_boundary);
    print_value("centered_solution_tv", r.centered_solution_tv);
    print_value("residual_norm2", r.residual_norm2);
    out!("iterations {}", r.iterations);
    if let Some(path) = &a.json {
        let report = TuneFreeReport {
            sigma_hat: format_f64(r.sigma_hat),
            radius2: format_f64(r.radius2),
            on_boundary: r.on_boundary,
            centered_solution_tv: format_f64(r.centered_solution_tv),
            residual_norm2: format_f64(r.residual_norm2),
            iterations: r.iterations,
        };
        let text = serde_json::to_string_pretty(&report)? + "\n";
        std::fs::write(path, text).map_err(|source| TvError::Io { path: path.clone(), source })?;
    }
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = a.solver.apply(monte_carlo_config())?;
    let spec = ExperimentSpec {
        signal: a.signal.into(),
        n_list: a.n_list.clone(),
        reps: a.reps,
        sigma: a.sigma,
        estimator: a.estimator.into(),
        seed: a.seed,
    };
    let report = run_experiment(&spec, &cfg)?;
    let sidecar = report.write(&a.out)?;
    print_value("slope", report.fit.slope);
    print_value("intercept", report.fit.intercept);
    print_value("slope_stderr", report.fit.slope_stderr);
    out!("report {}", a.out.display());
    out!("sidecar {}", sidecar.display());
    Ok(())
}

fn partition(a: PartitionArgs) -> Result<()> {
    let theta = ImageMatrix::read_csv(&a.input)?;
    let p = greedy_tv_partition(&theta, a.epsilon)?;
    let text = p.to_json()? + "\n";
    std::fs::write(&a.out, text).map_err(|source| TvError::Io { path: a.out.clone(), source })?;
    out!("blocks {}", p.len());
    print_value("count_bound", partition_count_bound(&theta, a.epsilon));
    Ok(())
}

fn gwidth(a: &GwidthArgs) -> Result<()> {
    let cfg = a.solver.apply(SolverConfig::default())?;
    let base = make_signal(&SignalKind::from(a.signal).at(a.n))?;
    let tol = a.edge_tol.unwrap_or_else(|| default_edge_tol(&base));
    let sp = sign_pattern(&base, tol)?;
    let w = gaussian_width_cone(&sp, a.samples, a.seed, &cfg)?;
    print_value("mean", w.mean);
    print_value("std_error", w.std_error);
    out!("samples {}", w.samples);
    out!("failures {}", w.failures);
    Ok(())
}

fn witness(a: WitnessArgs) -> Result<()> {
    let w = witness_estimate(a.n, a.samples, a.seed, a.c1)?;
    print_value("mean", w.mean);
    print_value("std_error", w.std_error);
    print_value("expected", w.expected);
    out!("samples {}", w.samples);
    print_value("max_norm", w.max_norm);
    out!("all_members {}", w.all_members);
    Ok(())
}
