//! Monte Carlo risk experiments and log-log slope fits.
//!
//! Replicate `rep` at side `n` draws its noise from a generator seeded with
//! [`replicate_seed`]`(seed, n, rep)`, so every replicate is reproducible on
//! its own and the report does not depend on how replicates are scheduled.
//! Per-`n` statistics are reduced in replicate order.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TvError};
use crate::grid::tv;
use crate::matrix::{format_f64, ImageMatrix};
use crate::rng::{replicate_seed, standard_normal_matrix, stream_rng};
use crate::signal::{make_signal, SignalKind};
use crate::solver::{project_tv_ball, SolverConfig};
use crate::tuning_free::denoise_notuning;

/// Solver settings for Monte Carlo runs: looser proximal accuracy than
/// [`SolverConfig::default`], with a tighter budget match.
pub fn monte_carlo_config() -> SolverConfig {
    SolverConfig { rel_tol: 1e-4, bisect_tol: 1e-5, ..SolverConfig::default() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Projection onto the TV ball of radius `tv(θ*)`.
    IdealConstrained,
    Notuning,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::IdealConstrained => "ideal_constrained",
            Estimator::Notuning => "notuning",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = TvError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" | "ideal_constrained" => Ok(Estimator::IdealConstrained),
            "notuning" => Ok(Estimator::Notuning),
            other => Err(TvError::argument(format!("unknown estimator '{other}' (expected ideal or notuning)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub signal: SignalKind,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub sigma: f64,
    pub estimator: Estimator,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(TvError::argument("n_list is empty"));
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n < 2 || n % 2 != 0) {
            return Err(TvError::argument(format!("every n must be even and at least 2, got {n}")));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TvError::argument(format!("n_list must be strictly ascending, got {:?}", self.n_list)));
        }
        if self.reps < 2 {
            return Err(TvError::argument(format!("reps must be at least 2, got {}", self.reps)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(TvError::argument(format!("sigma must be positive and finite, got {}", self.sigma)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseRecord {
    pub n: usize,
    /// `n²`
    #[serde(rename = "N")]
    pub big_n: usize,
    pub mse_mean: f64,
    pub mse_stderr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub records: Vec<MseRecord>,
    pub fit: LogLogFit,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    slope: f64,
    intercept: f64,
    slope_stderr: f64,
    spec: &'a ExperimentSpec,
    seed: u64,
}

pub const CSV_HEADER: &str = "signal,estimator,n,N,mse_mean,mse_stderr";

impl ExperimentReport {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.spec.signal,
                self.spec.estimator,
                r.n,
                r.big_n,
                format_f64(r.mse_mean),
                format_f64(r.mse_stderr)
            ));
        }
        out
    }

    /// `{slope, intercept, slope_stderr, spec, seed}`
    pub fn sidecar_json(&self) -> Result<String> {
        let sidecar = Sidecar {
            slope: self.fit.slope,
            intercept: self.fit.intercept,
            slope_stderr: self.fit.slope_stderr,
            spec: &self.spec,
            seed: self.spec.seed,
        };
        Ok(serde_json::to_string_pretty(&sidecar)? + "\n")
    }

    /// Writes the CSV to `path` and the sidecar next to it (see
    /// [`sidecar_path`]); returns the sidecar path.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<PathBuf> {
        let path = path.as_ref();
        let sidecar = sidecar_path(path);
        write_text(path, &self.to_csv_string())?;
        write_text(&sidecar, &self.sidecar_json()?)?;
        Ok(sidecar)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| TvError::Io { path: path.to_path_buf(), source })
}

/// `report.csv` → `report.json`; other names get `.json` appended.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    match csv.extension() {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => csv.with_extension("json"),
        _ => {
            let mut s = csv.as_os_str().to_owned();
            s.push(".json");
            PathBuf::from(s)
        }
    }
}

/// Ordinary least squares of `ln mse` on `ln N`. With exactly two points the
/// fit is exact and the reported standard error is zero.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 2 {
        return Err(TvError::argument(format!("need at least 2 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(TvError::argument(format!("log-log fit needs positive finite values, got ({x}, {y})")));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / k;
    let ybar = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(TvError::argument("log-log fit needs at least two distinct N"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let slope_stderr = if points.len() > 2 {
        let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (ssr / (k - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LogLogFit { slope, intercept, slope_stderr })
}

/// `y = θ* + σZ` for one replicate.
pub fn replicate_data(theta: &ImageMatrix, sigma: f64, seed: u64, rep: usize) -> ImageMatrix {
    let n = theta.rows();
    let mut rng = stream_rng(replicate_seed(seed, n as u64, rep as u64), 0);
    let z = standard_normal_matrix(&mut rng, theta.rows(), theta.cols());
    theta.axpy(sigma, &z).expect("same shape")
}

fn estimate(estimator: Estimator, theta: &ImageMatrix, y: &ImageMatrix, cfg: &SolverConfig) -> Result<ImageMatrix> {
    match estimator {
        Estimator::IdealConstrained => Ok(project_tv_ball(y, tv(theta), cfg)?.estimate),
        Estimator::Notuning => Ok(denoise_notuning(y, cfg)?.estimate),
    }
}

/// `‖θ̂ − θ*‖²/N` for replicate `rep` at side `n`.
pub fn replicate_mse(spec: &ExperimentSpec, n: usize, rep: usize, cfg: &SolverConfig) -> Result<f64> {
    let theta = make_signal(&spec.signal.at(n))?;
    let y = replicate_data(&theta, spec.sigma, spec.seed, rep);
    let est = estimate(spec.estimator, &theta, &y, cfg).map_err(|e| annotate(e, n, rep))?;
    Ok(est.dist_sq(&theta)? / (n * n) as f64)
}

fn annotate(err: TvError, n: usize, rep: usize) -> TvError {
    match err {
        TvError::Convergence { message, best } => TvError::Convergence { message: format!("n = {n}, rep = {rep}: {message}"), best },
        TvError::Argument(m) => TvError::Argument(format!("n = {n}, rep = {rep}: {m}")),
        other => other,
    }
}

pub fn run_experiment(spec: &ExperimentSpec, cfg: &SolverConfig) -> Result<ExperimentReport> {
    spec.validate()?;
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = spec.n_list.iter().flat_map(|&n| (0..spec.reps).map(move |rep| (n, rep))).collect();
    let results: Vec<Result<f64>> = jobs.par_iter().map(|&(n, rep)| replicate_mse(spec, n, rep, cfg)).collect();
    let mut mses = Vec::with_capacity(results.len());
    for r in results {
        mses.push(r?);
    }
    let records: Vec<MseRecord> = spec
        .n_list
        .iter()
        .zip(mses.chunks_exact(spec.reps))
        .map(|(&n, chunk)| {
            let (mse_mean, mse_stderr) = crate::geometry::mean_and_stderr(chunk);
            MseRecord { n, big_n: n * n, mse_mean, mse_stderr }
        })
        .collect();
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.big_n as f64, r.mse_mean)).collect();
    let fit = if points.len() >= 2 && points.iter().all(|p| p.1 > 0.0) {
        fit_loglog_slope(&points)?
    } else {
        LogLogFit { slope: f64::NAN, intercept: f64::NAN, slope_stderr: f64::NAN }
    };
    Ok(ExperimentReport { spec: spec.clone(), records, fit })
}
