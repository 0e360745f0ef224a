//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tvd::ImageMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> ImageMatrix {
    ImageMatrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..scale)).unwrap()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ImageMatrix {
    ImageMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal)).unwrap()
}

/// Grid edges as flat `(tail, head)` index pairs.
pub fn edge_pairs(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..rows {
        for j in 0..cols.saturating_sub(1) {
            out.push((i * cols + j, i * cols + j + 1));
        }
    }
    for i in 0..rows.saturating_sub(1) {
        for j in 0..cols {
            out.push((i * cols + j, (i + 1) * cols + j));
        }
    }
    out
}

pub fn brute_tv(values: &[f64], rows: usize, cols: usize) -> f64 {
    edge_pairs(rows, cols).iter().map(|&(a, b)| (values[b] - values[a]).abs()).sum()
}

/// Minimizer of `‖y − θ‖² + λ·tv(θ)` by exact coordinate descent on the dual
/// box-constrained quadratic `min ½‖y − Dᵀu‖², |u_e| ≤ λ/2`.
pub fn penalized_oracle(y: &ImageMatrix, lambda: f64) -> ImageMatrix {
    let (m, n) = y.shape();
    let edges = edge_pairs(m, n);
    let bound = 0.5 * lambda;
    let mut u = vec![0.0; edges.len()];
    let mut theta = y.values().to_vec();
    for _ in 0..1_000_000 {
        let mut moved: f64 = 0.0;
        for (k, &(a, b)) in edges.iter().enumerate() {
            let target = (u[k] + 0.5 * (theta[b] - theta[a])).clamp(-bound, bound);
            let step = target - u[k];
            if step != 0.0 {
                u[k] = target;
                theta[b] -= step;
                theta[a] += step;
                moved = moved.max(step.abs());
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    ImageMatrix::new(m, n, theta).unwrap()
}

/// Projection onto `{tv ≤ budget}` by bisection on the penalty of
/// [`penalized_oracle`].
pub fn projection_oracle(y: &ImageMatrix, budget: f64) -> ImageMatrix {
    let (m, n) = y.shape();
    if brute_tv(y.values(), m, n) <= budget {
        return y.clone();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while brute_tv(penalized_oracle(y, hi).values(), m, n) > budget {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if brute_tv(penalized_oracle(y, mid).values(), m, n) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    penalized_oracle(y, hi)
}

pub fn sup_dist(a: &ImageMatrix, b: &ImageMatrix) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `Σ_{zero edges} |Δθ| + Σ_{active} s_e Δθ` over flat edge pairs.
pub fn cone_h(values: &[f64], rows: usize, cols: usize, signs: &[i8]) -> f64 {
    edge_pairs(rows, cols)
        .iter()
        .zip(signs)
        .map(|(&(a, b), &s)| {
            let d = values[b] - values[a];
            if s == 0 { d.abs() } else { f64::from(s) * d }
        })
        .sum()
}

/// Projection of a 2×2 `z` onto `{h ≤ 0}` by coarse-to-fine grid search
/// over the four entries.
pub fn cone_projection_grid_oracle(z: &ImageMatrix, signs: &[i8]) -> ImageMatrix {
    assert_eq!(z.shape(), (2, 2));
    let zv = z.values();
    let points = 21i32;
    let mut center = [0.0; 4];
    let mut half = z.norm() + 0.05;
    let mut best = [0.0; 4];
    while half > 1e-5 {
        let step = 2.0 * half / f64::from(points - 1);
        let mut best_d = f64::INFINITY;
        let axis = |c: f64, k: i32| c - half + f64::from(k) * step;
        for a in 0..points {
            for b in 0..points {
                for c in 0..points {
                    for d in 0..points {
                        let t = [axis(center[0], a), axis(center[1], b), axis(center[2], c), axis(center[3], d)];
                        if cone_h(&t, 2, 2, signs) > 0.0 {
                            continue;
                        }
                        let dist: f64 = t.iter().zip(zv).map(|(x, y)| (x - y) * (x - y)).sum();
                        if dist < best_d {
                            best_d = dist;
                            best = t;
                        }
                    }
                }
            }
        }
        center = best;
        half = 2.0 * step;
    }
    ImageMatrix::new(2, 2, best.to_vec()).unwrap()
}
