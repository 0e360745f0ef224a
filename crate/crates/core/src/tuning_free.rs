//! The fully data-driven estimator.
//!
//! With `w = y − ȳ·1` and the noise estimate `σ̂ = √π·tv(y)/(4n(n−1))`, the
//! estimate is `ŵ + ȳ·1` where `ŵ` has minimum TV among matrices with
//! `‖w − ŵ‖² ≤ (n² − 1)σ̂²`. When zero is feasible it is the answer;
//! otherwise the optimum lies on the sphere and is found on the penalized path
//! of `w`, whose residual grows with the penalty.

use std::f64::consts::PI;

use crate::error::{Result, TvError};
use crate::grid::tv;
use crate::matrix::ImageMatrix;
use crate::solver::{constant_like, finish, search_from_zero, PenalizedSolver, RootOutcome, SolverConfig};

#[derive(Clone, Debug)]
pub struct TuningFreeResult {
    pub estimate: ImageMatrix,
    pub sigma_hat: f64,
    /// `(n² − 1)·σ̂²`
    pub radius2: f64,
    /// `true` when the centered solution is nonzero and sits on the sphere.
    pub on_boundary: bool,
    /// `tv(ŵ)`
    pub centered_solution_tv: f64,
    /// `‖w − ŵ‖²`
    pub residual_norm2: f64,
    pub iterations: usize,
}

fn check_square(y: &ImageMatrix) -> Result<usize> {
    if !y.is_square() || y.rows() < 2 {
        return Err(TvError::argument(format!(
            "expected a square matrix with side at least 2, got {}x{}",
            y.rows(),
            y.cols()
        )));
    }
    Ok(y.rows())
}

/// `√π·tv(y)/(4n(n−1))`, unbiased for `σ` when `y = σZ`.
pub fn sigma_hat(y: &ImageMatrix) -> Result<f64> {
    let n = check_square(y)? as f64;
    Ok(PI.sqrt() * tv(y) / (4.0 * n * (n - 1.0)))
}

pub fn denoise_notuning(y: &ImageMatrix, cfg: &SolverConfig) -> Result<TuningFreeResult> {
    cfg.validate()?;
    let n = check_square(y)? as f64;
    let sigma_hat = sigma_hat(y)?;
    let radius2 = (n * n - 1.0) * sigma_hat * sigma_hat;
    let mean = y.mean();
    let w = y.add_scalar(-mean);
    let w_norm2 = w.norm_sq();

    if w_norm2 <= radius2 {
        return Ok(TuningFreeResult {
            estimate: constant_like(y, mean),
            sigma_hat,
            radius2,
            on_boundary: false,
            centered_solution_tv: 0.0,
            residual_norm2: w_norm2,
            iterations: 0,
        });
    }
    if radius2 == 0.0 {
        // Only reachable through rounding: σ̂ vanishes exactly when w does.
        return Ok(TuningFreeResult {
            estimate: y.clone(),
            sigma_hat,
            radius2,
            on_boundary: true,
            centered_solution_tv: tv(&w),
            residual_norm2: 0.0,
            iterations: 0,
        });
    }

    let tol = cfg.bisect_tol * radius2;
    let mut solver = PenalizedSolver::new(&w, *cfg)?;
    let mut iterations = 0;
    // r² − ‖w − ŵ_λ‖² starts at r² and ends at r² − ‖w‖² < 0
    let outcome = search_from_zero(radius2, 1.0, tol, cfg.max_bisect, |lambda| {
        let r = solver.solve(lambda)?;
        iterations += r.iterations;
        Ok((radius2 - r.residual_norm2, r))
    })?;
    let r = match outcome {
        RootOutcome::Found(p) => finish(p.payload, iterations),
        RootOutcome::Exhausted(best) => {
            let best = best.map(|p| p.payload);
            let achieved = best.as_ref().map_or(f64::NAN, |b| b.residual_norm2);
            return Err(TvError::convergence(
                format!("residual search did not reach radius² {radius2} (closest residual {achieved})"),
                best.map(|b| b.estimate.add_scalar(mean)),
            ));
        }
    };
    Ok(TuningFreeResult {
        estimate: r.estimate.add_scalar(mean),
        sigma_hat,
        radius2,
        on_boundary: true,
        centered_solution_tv: r.achieved_tv,
        residual_norm2: r.residual_norm2,
        iterations: r.iterations,
    })
}
