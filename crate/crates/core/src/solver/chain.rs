//! Exact weighted 1D total-variation denoising on a chain.
//!
//! Solves `min_β ½ Σ (β_i − y_i)² + Σ λ_i |β_{i+1} − β_i|` with a forward
//! dynamic program over the derivative of the partial objective, which is
//! continuous, increasing and piecewise linear, followed by a back-pointer
//! pass. Each step adds at most two knots, so the cost is linear in the
//! chain length.

pub(crate) trait ChainWeights {
    fn at(&self, k: usize) -> f64;
}

impl ChainWeights for f64 {
    #[inline]
    fn at(&self, _k: usize) -> f64 {
        *self
    }
}

impl ChainWeights for &[f64] {
    #[inline]
    fn at(&self, k: usize) -> f64 {
        self[k]
    }
}

/// Reusable scratch space for chains up to a given length.
#[derive(Clone, Debug, Default)]
pub(crate) struct ChainSolver {
    knots: Vec<Knot>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// A breakpoint of the derivative; crossing it left to right adds
/// `(da, dc)` to the slope and intercept.
#[derive(Clone, Copy, Debug, Default)]
struct Knot {
    at: f64,
    da: f64,
    dc: f64,
}

impl ChainSolver {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    fn reserve(&mut self, n: usize) {
        let cap = 2 * n + 2;
        if self.knots.len() < cap {
            self.knots.resize(cap, Knot::default());
        }
        if self.lo.len() < n {
            self.lo.resize(n, 0.0);
            self.hi.resize(n, 0.0);
        }
    }

    /// Writes the minimizer into `out`. `weights.at(k)` is the weight of the
    /// edge between positions `k` and `k + 1` and must be nonnegative.
    pub(crate) fn solve<W: ChainWeights>(&mut self, y: &[f64], weights: W, out: &mut [f64]) {
        let n = y.len();
        debug_assert_eq!(out.len(), n);
        if n == 0 {
            return;
        }
        if n == 1 {
            out[0] = y[0];
            return;
        }
        self.reserve(n);
        let knots = &mut self.knots[..2 * n + 2];
        let (lo, hi) = (&mut self.lo[..n], &mut self.hi[..n]);

        // Knots live in knots[l..=r], sorted by position.
        let mut l = n + 1;
        let mut r = n;
        let (mut a_left, mut c_left) = (1.0, -y[0]);
        let (mut a_right, mut c_right) = (1.0, -y[0]);

        for k in 0..n - 1 {
            let lam = weights.at(k);

            let (mut a, mut c) = (a_left, c_left);
            while l <= r {
                let kn = knots[l];
                if a * kn.at + c >= -lam {
                    break;
                }
                a += kn.da;
                c += kn.dc;
                l += 1;
            }
            let t_lo = (-lam - c) / a;

            let (mut a2, mut c2) = (a_right, c_right);
            while l <= r {
                let kn = knots[r];
                if a2 * kn.at + c2 <= lam {
                    break;
                }
                a2 -= kn.da;
                c2 -= kn.dc;
                r -= 1;
            }
            let t_hi = (lam - c2) / a2;

            l -= 1;
            knots[l] = Knot { at: t_lo, da: a, dc: c + lam };
            r += 1;
            knots[r] = Knot { at: t_hi, da: -a2, dc: lam - c2 };

            lo[k] = t_lo;
            hi[k] = t_hi;

            a_left = 1.0;
            c_left = -lam - y[k + 1];
            a_right = 1.0;
            c_right = lam - y[k + 1];
        }

        let (mut a, mut c) = (a_left, c_left);
        while l <= r && a * knots[l].at + c < 0.0 {
            a += knots[l].da;
            c += knots[l].dc;
            l += 1;
        }
        out[n - 1] = -c / a;
        for k in (0..n - 1).rev() {
            // max/min rather than clamp: rounding can leave lo a hair above hi when λ = 0
            out[k] = out[k + 1].max(lo[k]).min(hi[k]);
        }
    }
}
