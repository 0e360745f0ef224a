//! Tangent cones of the TV ball, projections onto them, Gaussian widths and
//! the explicit lower-bound witness for the two-piece signal.
//!
//! At `θ*` with active edges `A = {e : |Δ_e θ*| > tol}` and signs `s_e`, the
//! tangent cone of `{tv ≤ tv(θ*)}` is `{θ : h(θ) ≤ 0}` with
//! `h(θ) = Σ_{A^c} |Δ_e θ| + Σ_A s_e Δ_e θ`.
//!
//! Projection onto the cone tunes a multiplier `μ ≥ 0`: the minimizer of
//! `½‖Z − θ‖² + μ·h(θ)` is the weighted TV proximal point of the shifted data
//! `Z − μ·D_Aᵀs` with weight `μ` on `A^c` and `0` on `A`, and `h` along this
//! path is nonincreasing in `μ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, TvError};
use crate::grid::{edge_count, horizontal_edge_count, tv, EdgeIndex};
use crate::matrix::ImageMatrix;
use crate::partition::Rect;
use crate::rng::{standard_normal_matrix, stream_rng};
use crate::signal::{make_signal, SignalKind};
use crate::solver::{constant_like, search_from_zero, solve_prox, AnisotropicProx, EdgeWeights, RootOutcome, SolverConfig};

/// Active edges and their gradient signs at a base point.
#[derive(Clone, Debug)]
pub struct SignPattern {
    base: ImageMatrix,
    edge_tol: f64,
    /// Per canonical edge position: `+1`, `−1`, or `0` for a zero edge.
    signs: Vec<i8>,
}

impl SignPattern {
    pub fn base(&self) -> &ImageMatrix {
        &self.base
    }

    pub fn edge_tol(&self) -> f64 {
        self.edge_tol
    }

    pub fn shape(&self) -> (usize, usize) {
        self.base.shape()
    }

    /// Active edges in canonical order with their signs.
    pub fn active(&self) -> Vec<(EdgeIndex, i8)> {
        let (m, n) = self.shape();
        self.signs
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(k, &s)| (EdgeIndex::from_position(k, m, n).expect("position in range"), s))
            .collect()
    }

    pub fn active_count(&self) -> usize {
        self.signs.iter().filter(|&&s| s != 0).count()
    }

    /// Signs by canonical edge position (`0` on zero edges).
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// `h(θ) = Σ_{A^c} |Δ_e θ| + Σ_A s_e Δ_e θ`; the cone is `{h ≤ 0}`.
    pub fn h(&self, theta: &ImageMatrix) -> Result<f64> {
        self.base.check_same_shape(theta)?;
        Ok(self.h_unchecked(theta))
    }

    fn h_unchecked(&self, theta: &ImageMatrix) -> f64 {
        let (m, n) = self.shape();
        let v = theta.values();
        let mut total = 0.0;
        let mut k = 0;
        let mut add = |s: i8, d: f64| {
            total += if s == 0 { d.abs() } else { f64::from(s) * d };
        };
        for i in 0..m {
            for j in 0..n - 1 {
                add(self.signs[k], v[i * n + j + 1] - v[i * n + j]);
                k += 1;
            }
        }
        for i in 0..m.saturating_sub(1) {
            for j in 0..n {
                add(self.signs[k], v[(i + 1) * n + j] - v[i * n + j]);
                k += 1;
            }
        }
        total
    }

    /// `D_Aᵀ s`: the adjoint of the active edge gradients applied to the signs.
    fn active_adjoint(&self) -> ImageMatrix {
        let (m, n) = self.shape();
        let mut out = vec![0.0; m * n];
        for (k, &s) in self.signs.iter().enumerate() {
            if s != 0 {
                let e = EdgeIndex::from_position(k, m, n).expect("position in range");
                let (t, h) = (e.tail(), e.head());
                out[h.0 * n + h.1] += f64::from(s);
                out[t.0 * n + t.1] -= f64::from(s);
            }
        }
        ImageMatrix::from_raw(m, n, out)
    }
}

/// `1e-9·max(1, ‖θ*‖∞)`
pub fn default_edge_tol(base: &ImageMatrix) -> f64 {
    1e-9 * base.max_abs().max(1.0)
}

/// Classifies every edge as active (`|Δ_e θ*| > edge_tol`) or zero.
pub fn sign_pattern(base: &ImageMatrix, edge_tol: f64) -> Result<SignPattern> {
    if !(edge_tol.is_finite() && edge_tol >= 0.0) {
        return Err(TvError::argument(format!("edge tolerance must be nonnegative and finite, got {edge_tol}")));
    }
    let signs = crate::grid::gradients(base)
        .into_iter()
        .map(|d| if d.abs() <= edge_tol { 0 } else if d > 0.0 { 1 } else { -1 })
        .collect();
    Ok(SignPattern { base: base.clone(), edge_tol, signs })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    /// `−h(θ)`: right side minus left side of the cone inequality.
    pub slack: f64,
}

/// Tests `Σ_{A^c} |Δ_e θ| ≤ −Σ_A s_e Δ_e θ` up to `1e-9·max(1, tv(θ))`.
pub fn cone_membership(sp: &SignPattern, theta: &ImageMatrix) -> Result<Membership> {
    let slack = -sp.h(theta)?;
    Ok(Membership { member: slack >= -1e-9 * tv(theta).max(1.0), slack })
}

/// A cone projection with its multiplier.
#[derive(Clone, Debug)]
pub struct ConeProjection {
    pub projection: ImageMatrix,
    pub mu: f64,
    /// `h(projection)`, in `[−tol, 0]` unless the input was already a member.
    pub h: f64,
    pub iterations: usize,
}

/// Tolerance on `h` at the returned projection: `1e-6·mn`.
fn cone_tolerance(sp: &SignPattern) -> f64 {
    let (m, n) = sp.shape();
    1e-6 * (m * n) as f64
}

/// Euclidean projection of `z` onto the tangent cone of `sp`.
pub fn project_onto_cone(sp: &SignPattern, z: &ImageMatrix, cfg: &SolverConfig) -> Result<ImageMatrix> {
    Ok(project_onto_cone_detailed(sp, z, cfg)?.projection)
}

pub fn project_onto_cone_detailed(sp: &SignPattern, z: &ImageMatrix, cfg: &SolverConfig) -> Result<ConeProjection> {
    cfg.validate()?;
    sp.base.check_same_shape(z)?;
    let h0 = sp.h_unchecked(z);
    if h0 <= 0.0 {
        return Ok(ConeProjection { projection: z.clone(), mu: 0.0, h: h0, iterations: 0 });
    }
    if sp.active_count() == 0 {
        // every edge must be flat: the cone is the line of constants
        return Ok(ConeProjection { projection: constant_like(z, z.mean()), mu: f64::INFINITY, h: 0.0, iterations: 0 });
    }
    let mut path = ConePath::new(sp, z, *cfg);
    let tol = cone_tolerance(sp);
    let half = 0.5 * tol;
    // target h ∈ [−tol, 0]: find a root of h + tol/2 within tol/2
    let outcome = search_from_zero(h0 + half, 1.0, half, cfg.max_bisect, |mu| {
        let theta = path.solve(mu)?;
        let h = sp.h_unchecked(&theta);
        Ok((h + half, (mu, theta, h)))
    })?;
    match outcome {
        RootOutcome::Found(p) => {
            let (mu, projection, h) = p.payload;
            Ok(ConeProjection { projection, mu, h, iterations: path.iterations })
        }
        RootOutcome::Exhausted(_) => path.sweep(tol),
    }
}

/// Solutions of the multiplier problem for one `(pattern, data)` pair.
struct ConePath<'a> {
    sp: &'a SignPattern,
    z: &'a ImageMatrix,
    cfg: SolverConfig,
    adjoint: ImageMatrix,
    prox: AnisotropicProx,
    horizontal: Vec<f64>,
    vertical: Vec<f64>,
    iterations: usize,
}

impl<'a> ConePath<'a> {
    fn new(sp: &'a SignPattern, z: &'a ImageMatrix, cfg: SolverConfig) -> Self {
        let (m, n) = sp.shape();
        let nh = horizontal_edge_count(m, n);
        ConePath {
            sp,
            z,
            cfg,
            adjoint: sp.active_adjoint(),
            prox: AnisotropicProx::new(m, n),
            horizontal: vec![0.0; nh],
            vertical: vec![0.0; edge_count(m, n) - nh],
            iterations: 0,
        }
    }

    /// Minimizer of `½‖Z − θ‖² + μ·h(θ)`.
    fn solve(&mut self, mu: f64) -> Result<ImageMatrix> {
        let nh = self.horizontal.len();
        for (k, &s) in self.sp.signs.iter().enumerate() {
            let w = if s == 0 { mu } else { 0.0 };
            if k < nh {
                self.horizontal[k] = w;
            } else {
                self.vertical[k - nh] = w;
            }
        }
        let data = self.z.axpy(-mu, &self.adjoint)?;
        let weights = EdgeWeights::PerEdge { horizontal: &self.horizontal, vertical: &self.vertical };
        let (theta, iters, converged) = solve_prox(&mut self.prox, &data, weights, &self.cfg);
        self.iterations += iters;
        if !converged {
            return Err(TvError::convergence(format!("cone projection inner solve at μ = {mu} hit the iteration cap"), Some(theta)));
        }
        Ok(theta)
    }

    /// Fallback: geometric sweep for the first feasible multiplier, then
    /// midpoint refinement that always keeps a feasible end.
    fn sweep(&mut self, tol: f64) -> Result<ConeProjection> {
        let mut lo = 0.0;
        let mut hi = None;
        let mut mu = 1e-6;
        while mu < 1e12 {
            let theta = self.solve(mu)?;
            let h = self.sp.h_unchecked(&theta);
            if h <= 0.0 {
                hi = Some((mu, theta, h));
                break;
            }
            lo = mu;
            mu *= 2.0;
        }
        let Some(mut best) = hi else {
            return Err(TvError::convergence("cone projection found no feasible multiplier", None));
        };
        for _ in 0..self.cfg.max_bisect {
            if best.2 >= -tol {
                break;
            }
            let mid = 0.5 * (lo + best.0);
            let theta = self.solve(mid)?;
            let h = self.sp.h_unchecked(&theta);
            if h <= 0.0 {
                best = (mid, theta, h);
            } else {
                lo = mid;
            }
        }
        let (mu, projection, h) = best;
        if h < -tol {
            return Err(TvError::convergence(format!("cone projection stopped at h = {h}, outside [-{tol}, 0]"), Some(projection)));
        }
        Ok(ConeProjection { projection, mu, h, iterations: self.iterations })
    }
}

/// The constant pieces of a block signal: the two column halves of `two`, the
/// four quadrants of `four`. `worst` is not piecewise constant on rectangles.
pub fn natural_rects(kind: SignalKind, n: usize) -> Option<Vec<Rect>> {
    let h = n / 2;
    if n < 2 || !n.is_multiple_of(2) {
        return None;
    }
    match kind {
        SignalKind::Two => Some(vec![Rect { row_lo: 0, row_hi: n - 1, col_lo: 0, col_hi: h - 1 }, Rect { row_lo: 0, row_hi: n - 1, col_lo: h, col_hi: n - 1 }]),
        SignalKind::Four => Some(
            [(0, h - 1), (h, n - 1)]
                .iter()
                .flat_map(|&(rl, rh)| [(0, h - 1), (h, n - 1)].map(|(cl, ch)| Rect { row_lo: rl, row_hi: rh, col_lo: cl, col_hi: ch }))
                .collect(),
        ),
        SignalKind::Worst => None,
    }
}

/// `‖left‖₁ + ‖right‖₁ + ‖top‖₁ + ‖bottom‖₁` of the block of `theta` under
/// `r`; corner cells count twice.
pub fn boundary_l1(theta: &ImageMatrix, r: &Rect) -> f64 {
    let row_sum = |i: usize| theta.row(i)[r.col_lo..=r.col_hi].iter().map(|v| v.abs()).sum::<f64>();
    let col_sum = |j: usize| (r.row_lo..=r.row_hi).map(|i| theta.get(i, j).abs()).sum::<f64>();
    row_sum(r.row_lo) + row_sum(r.row_hi) + col_sum(r.col_lo) + col_sum(r.col_hi)
}

/// Both sides of `Σ_i tv(θ_{R_i}) ≤ Σ_i boundary_l1(θ, R_i)`, which holds for
/// every cone member when `θ*` is constant on each `R_i`.
pub fn boundary_inequality(theta: &ImageMatrix, rects: &[Rect]) -> Result<(f64, f64)> {
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for r in rects {
        lhs += tv(&theta.block(r.row_lo, r.row_hi, r.col_lo, r.col_hi)?);
        rhs += boundary_l1(theta, r);
    }
    Ok((lhs, rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WidthEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√samples`.
    pub std_error: f64,
    /// Successful samples.
    pub samples: usize,
    pub failures: usize,
}

/// Monte Carlo estimate of `E ‖Π_cone(Z)‖`, the Gaussian width of the cone
/// intersected with the unit ball. Sample `k` uses stream `k` under `seed`.
pub fn gaussian_width_cone(sp: &SignPattern, samples: usize, seed: u64, cfg: &SolverConfig) -> Result<WidthEstimate> {
    if samples < 2 {
        return Err(TvError::argument(format!("need at least 2 samples, got {samples}")));
    }
    cfg.validate()?;
    let (m, n) = sp.shape();
    let norms: Vec<Option<f64>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let z = standard_normal_matrix(&mut stream_rng(seed, k as u64), m, n);
            project_onto_cone(sp, &z, cfg).ok().map(|p| p.norm())
        })
        .collect();
    let ok: Vec<f64> = norms.iter().flatten().copied().collect();
    let failures = samples - ok.len();
    if failures * 100 > samples || ok.len() < 2 {
        return Err(TvError::convergence(format!("{failures} of {samples} cone projections failed"), None));
    }
    let (mean, std_error) = mean_and_stderr(&ok);
    Ok(WidthEstimate { mean, std_error, samples: ok.len(), failures })
}

/// Mean and standard error by ordered summation.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// `c2 = min{c1, √(1 − c1²)}`
pub fn witness_c2(c1: f64) -> f64 {
    c1.min((1.0 - c1 * c1).sqrt())
}

/// Default `c1 = 1/√2`, which maximizes `c2`.
pub const WITNESS_C1: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `(c2 − c1/√n)·n^{1/4}/√(2π)`, the expectation of `⟨ν, Z⟩`.
pub fn witness_expectation(n: usize, c1: f64) -> f64 {
    let n = n as f64;
    (witness_c2(c1) - c1 / n.sqrt()) * n.powf(0.25) / (2.0 * std::f64::consts::PI).sqrt()
}

fn witness_side(n: usize) -> Result<usize> {
    let root = (n as f64).sqrt().round() as usize;
    if n < 4 || !n.is_multiple_of(2) || root * root != n {
        return Err(TvError::argument(format!("witness needs an even perfect-square side, got {n}")));
    }
    Ok(root)
}

/// The unit-norm cone member for the two-piece signal built from `Z`: the
/// first `n/2 − 1` columns equal `c1/n`, the last `n/2` are zero, and column
/// `n/2` (1-based) is `c2/√n` on each block of `√n` rows whose `Z` sum is
/// positive and `c1/n` elsewhere.
pub fn lower_bound_witness(z: &ImageMatrix, c1: f64) -> Result<ImageMatrix> {
    if !z.is_square() {
        return Err(TvError::argument(format!("witness needs a square matrix, got {}x{}", z.rows(), z.cols())));
    }
    let n = z.rows();
    let root = witness_side(n)?;
    if !(c1 > 0.0 && c1 < 1.0) {
        return Err(TvError::argument(format!("c1 must lie in (0, 1), got {c1}")));
    }
    let c2 = witness_c2(c1);
    let low = c1 / n as f64;
    let high = c2 / (root as f64);
    let mid = n / 2 - 1;
    let mut out = vec![0.0; n * n];
    for block in 0..root {
        let rows = block * root..(block + 1) * root;
        let sum: f64 = rows.clone().map(|i| z.get(i, mid)).sum();
        let v = if sum > 0.0 { high } else { low };
        for i in rows {
            out[i * n..i * n + mid].iter_mut().for_each(|x| *x = low);
            out[i * n + mid] = v;
        }
    }
    ImageMatrix::new(n, n, out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WitnessEstimate {
    /// Sample mean of `⟨ν(Z), Z⟩`.
    pub mean: f64,
    pub std_error: f64,
    /// [`witness_expectation`] at the same `n` and `c1`.
    pub expected: f64,
    pub samples: usize,
    /// Largest `‖ν‖` over the draws.
    pub max_norm: f64,
    /// Whether every witness passed [`cone_membership`] for the two-piece
    /// signal.
    pub all_members: bool,
}

/// Monte Carlo check of the witness: draw `k` uses stream `k` under `seed`.
pub fn witness_estimate(n: usize, samples: usize, seed: u64, c1: f64) -> Result<WitnessEstimate> {
    witness_side(n)?;
    if samples < 2 {
        return Err(TvError::argument(format!("need at least 2 samples, got {samples}")));
    }
    let base = make_signal(&SignalKind::Two.at(n))?;
    let sp = sign_pattern(&base, default_edge_tol(&base))?;
    let draws: Vec<(f64, f64, bool)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let z = standard_normal_matrix(&mut stream_rng(seed, k as u64), n, n);
            let nu = lower_bound_witness(&z, c1)?;
            let member = cone_membership(&sp, &nu)?.member;
            Ok((nu.dot(&z)?, nu.norm(), member))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let (mean, std_error) = mean_and_stderr(&values);
    Ok(WitnessEstimate {
        mean,
        std_error,
        expected: witness_expectation(n, c1),
        samples,
        max_norm: draws.iter().map(|d| d.1).fold(0.0, f64::max),
        all_members: draws.iter().all(|d| d.2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::make_signal;

    #[test]
    fn adjoint_matches_gradient_pairing() {
        let base = make_signal(&SignalKind::Four.at(4)).unwrap();
        let sp = sign_pattern(&base, default_edge_tol(&base)).unwrap();
        let theta = ImageMatrix::from_fn(4, 4, |i, j| (i * 3 + j * j) as f64 * 0.1).unwrap();
        let grads = crate::grid::gradients(&theta);
        let lhs: f64 = sp.signs().iter().zip(&grads).map(|(&s, d)| f64::from(s) * d).sum();
        let rhs = sp.active_adjoint().dot(&theta).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn witness_side_validation() {
        assert_eq!(witness_side(16).unwrap(), 4);
        assert_eq!(witness_side(4).unwrap(), 2);
        assert!(witness_side(9).is_err());
        assert!(witness_side(8).is_err());
    }
}
