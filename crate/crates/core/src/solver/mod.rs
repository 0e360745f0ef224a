//! Penalized and constrained TV denoising.
//!
//! * [`denoise_penalized`] minimizes `‖y − θ‖² + λ·tv(θ)` with the
//!   unnormalized `tv`. Callers holding a penalty on the canonically scaled
//!   `tv_norm = tv/n` pass `λ/n`.
//! * [`project_tv_ball`] is the Euclidean projection onto `{θ : tv(θ) ≤ V}`,
//!   found by bisection over the penalty along the penalized path, whose
//!   achieved TV is nonincreasing in `λ`.
//!
//! The proximal problem itself is solved by splitting the grid into row and
//! column chains, each solved exactly, and accelerating on the column dual.
//! Iteration stops once the duality gap certifies
//! `‖θ − θ*‖ ≤ rel_tol·‖y − ȳ‖`.

mod chain;
mod primal_dual;
pub(crate) mod prox;
pub(crate) mod root;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TvError};
use crate::grid::tv;
use crate::matrix::ImageMatrix;
pub(crate) use root::{search_from_zero, RootOutcome};

pub(crate) use prox::{AnisotropicProx, EdgeWeights};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Cap on inner iterations per proximal solve.
    pub max_iters: usize,
    /// Relative accuracy of each proximal solve, certified by the duality gap.
    pub rel_tol: f64,
    /// Relative tolerance for matching a TV budget or residual radius.
    pub bisect_tol: f64,
    /// Cap on bisection (and bracket doubling) steps.
    pub max_bisect: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 20_000,
            rel_tol: 1e-7,
            bisect_tol: 1e-4,
            max_bisect: 60,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.max_bisect == 0 {
            return Err(TvError::argument("max_iters and max_bisect must be at least 1"));
        }
        for (name, v) in [("rel_tol", self.rel_tol), ("bisect_tol", self.bisect_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(TvError::argument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DenoiseResult {
    pub estimate: ImageMatrix,
    /// `tv(estimate)`
    pub achieved_tv: f64,
    /// `‖y − estimate‖²`
    pub residual_norm2: f64,
    /// Inner iterations, summed over all proximal solves.
    pub iterations: usize,
    pub converged: bool,
}

impl DenoiseResult {
    fn new(y: &ImageMatrix, estimate: ImageMatrix, iterations: usize, converged: bool) -> Self {
        let achieved_tv = tv(&estimate);
        let residual_norm2 = y.dist_sq(&estimate).expect("same shape");
        DenoiseResult { estimate, achieved_tv, residual_norm2, iterations, converged }
    }

    fn exact(y: &ImageMatrix, estimate: ImageMatrix) -> Self {
        DenoiseResult::new(y, estimate, 0, true)
    }
}

pub(crate) fn constant_like(y: &ImageMatrix, value: f64) -> ImageMatrix {
    ImageMatrix::from_raw(y.rows(), y.cols(), vec![value; y.len()])
}

/// Solves `min ½‖x − data‖² + Σ_e w_e |(Dx)_e|` and shifts the result so its
/// mean matches `data` exactly (every exact minimizer does).
pub(crate) fn solve_prox(
    prox: &mut AnisotropicProx,
    data: &ImageMatrix,
    w: EdgeWeights<'_>,
    cfg: &SolverConfig,
) -> (ImageMatrix, usize, bool) {
    if data.len() == 1 {
        return (data.clone(), 0, true);
    }
    let mean = data.mean();
    let scale = data.values().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>().sqrt();
    if scale == 0.0 {
        return (data.clone(), 0, true);
    }
    let gap_tol = 0.5 * (cfg.rel_tol * scale).powi(2);
    let out = prox.solve(data.values(), w, cfg.max_iters, gap_tol);
    let mut x = out.x;
    let shift = mean - x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v += shift);
    (ImageMatrix::from_raw(data.rows(), data.cols(), x), out.iterations, out.converged)
}

/// A penalized solver bound to one data matrix, reusing its dual state as a
/// warm start from one penalty to the next.
pub struct PenalizedSolver<'a> {
    y: &'a ImageMatrix,
    cfg: SolverConfig,
    prox: AnisotropicProx,
}

impl<'a> PenalizedSolver<'a> {
    pub fn new(y: &'a ImageMatrix, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(PenalizedSolver { y, cfg, prox: AnisotropicProx::new(y.rows(), y.cols()) })
    }

    pub fn data(&self) -> &ImageMatrix {
        self.y
    }

    /// Minimizer of `‖y − θ‖² + λ·tv(θ)`.
    pub fn solve(&mut self, lambda: f64) -> Result<DenoiseResult> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(TvError::argument(format!("penalty must be a nonnegative finite number, got {lambda}")));
        }
        if lambda == 0.0 {
            return Ok(DenoiseResult::exact(self.y, self.y.clone()));
        }
        let (x, iterations, converged) = solve_prox(&mut self.prox, self.y, EdgeWeights::Uniform(0.5 * lambda), &self.cfg);
        Ok(DenoiseResult::new(self.y, x, iterations, converged))
    }
}

/// Minimizer of `‖y − θ‖² + λ·tv(θ)` (unnormalized TV).
pub fn denoise_penalized(y: &ImageMatrix, lambda: f64, cfg: &SolverConfig) -> Result<DenoiseResult> {
    PenalizedSolver::new(y, *cfg)?.solve(lambda)
}

/// The same minimizer computed by the plain primal–dual iteration, with the
/// relative iterate change as the stopping rule. Much slower; intended for
/// cross-checking.
pub fn denoise_penalized_primal_dual(y: &ImageMatrix, lambda: f64, cfg: &SolverConfig) -> Result<DenoiseResult> {
    cfg.validate()?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(TvError::argument(format!("penalty must be a nonnegative finite number, got {lambda}")));
    }
    if lambda == 0.0 || y.len() == 1 {
        return Ok(DenoiseResult::exact(y, y.clone()));
    }
    let mut pd = primal_dual::PrimalDual::new(y);
    let (iterations, converged) = pd.run(y.values(), EdgeWeights::Uniform(0.5 * lambda), cfg.max_iters, cfg.rel_tol);
    let estimate = ImageMatrix::from_raw(y.rows(), y.cols(), pd.x);
    Ok(DenoiseResult::new(y, estimate, iterations, converged))
}

/// Euclidean projection of `y` onto `{θ : tv(θ) ≤ budget}`.
pub fn project_tv_ball(y: &ImageMatrix, budget: f64, cfg: &SolverConfig) -> Result<DenoiseResult> {
    cfg.validate()?;
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(TvError::argument(format!("TV budget must be a nonnegative finite number, got {budget}")));
    }
    if tv(y) <= budget {
        return Ok(DenoiseResult::exact(y, y.clone()));
    }
    if budget == 0.0 {
        return Ok(DenoiseResult::exact(y, constant_like(y, y.mean())));
    }
    let tol = cfg.bisect_tol * budget.max(1.0);
    let mut solver = PenalizedSolver::new(y, *cfg)?;
    let mut iterations = 0;
    // tv(θ_λ) − budget is positive at λ = 0 and nonincreasing in λ
    let outcome = search_from_zero(tv(y) - budget, 1.0, tol, cfg.max_bisect, |lambda| {
        let r = solver.solve(lambda)?;
        iterations += r.iterations;
        Ok((r.achieved_tv - budget, r))
    })?;
    match outcome {
        RootOutcome::Found(p) => Ok(finish(p.payload, iterations)),
        RootOutcome::Exhausted(best) => Err(bracket_failure(budget, best.map(|p| p.payload))),
    }
}

pub(crate) fn finish(mut r: DenoiseResult, iterations: usize) -> DenoiseResult {
    r.iterations = iterations;
    r
}

fn bracket_failure(budget: f64, best: Option<DenoiseResult>) -> TvError {
    let achieved = best.as_ref().map_or(f64::NAN, |b| b.achieved_tv);
    TvError::convergence(
        format!("TV-ball bisection did not reach budget {budget} (closest achieved TV {achieved})"),
        best.map(|b| b.estimate),
    )
}
