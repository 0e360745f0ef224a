//! Greedy recursive partitions, block averaging and ε-net representatives.
//!
//! The `(TV, ε)` scheme splits any block whose TV exceeds `ε` into four
//! near-equal quadrants (the top-left one takes `⌈rows/2⌉ × ⌈cols/2⌉`) and
//! recurses depth-first in the order top-left, top-right, bottom-left,
//! bottom-right. The 1D `(T, ε)` scheme halves a sequence, the left part
//! taking `⌊len/2⌋` items, until every piece satisfies `T ≤ ε`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TvError};
use crate::grid::tv_1d;
use crate::matrix::ImageMatrix;

/// An axis-aligned block with inclusive bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub row_lo: usize,
    pub row_hi: usize,
    pub col_lo: usize,
    pub col_hi: usize,
}

impl Rect {
    pub fn new(row_lo: usize, row_hi: usize, col_lo: usize, col_hi: usize) -> Result<Rect> {
        if row_lo > row_hi || col_lo > col_hi {
            return Err(TvError::argument(format!("empty rectangle [{row_lo},{row_hi}]x[{col_lo},{col_hi}]")));
        }
        Ok(Rect { row_lo, row_hi, col_lo, col_hi })
    }

    pub fn full(rows: usize, cols: usize) -> Rect {
        Rect { row_lo: 0, row_hi: rows - 1, col_lo: 0, col_hi: cols - 1 }
    }

    pub fn nrows(&self) -> usize {
        self.row_hi - self.row_lo + 1
    }

    pub fn ncols(&self) -> usize {
        self.col_hi - self.col_lo + 1
    }

    pub fn area(&self) -> usize {
        self.nrows() * self.ncols()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        (self.row_lo..=self.row_hi).contains(&i) && (self.col_lo..=self.col_hi).contains(&j)
    }

    /// `max(rows/cols, cols/rows)`
    pub fn aspect_ratio(&self) -> f64 {
        let (r, c) = (self.nrows() as f64, self.ncols() as f64);
        (r / c).max(c / r)
    }

    /// The four near-equal quadrants in canonical order, omitting empty ones.
    fn quadrants(&self) -> Vec<Rect> {
        let r_mid = self.row_lo + self.nrows().div_ceil(2);
        let c_mid = self.col_lo + self.ncols().div_ceil(2);
        let rows = [(self.row_lo, r_mid - 1), (r_mid, self.row_hi)];
        let cols = [(self.col_lo, c_mid - 1), (c_mid, self.col_hi)];
        let mut out = Vec::with_capacity(4);
        for &(rl, rh) in &rows {
            for &(cl, ch) in &cols {
                if rl <= rh && cl <= ch && rh <= self.row_hi && ch <= self.col_hi {
                    out.push(Rect { row_lo: rl, row_hi: rh, col_lo: cl, col_hi: ch });
                }
            }
        }
        out
    }
}

/// Rectangles covering a `rows × cols` grid exactly once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectPartition {
    shape: (usize, usize),
    rects: Vec<Rect>,
}

impl RectPartition {
    pub fn new(shape: (usize, usize), rects: Vec<Rect>) -> Result<RectPartition> {
        let (m, n) = shape;
        let mut hits = vec![0u8; m * n];
        for r in &rects {
            if r.row_lo > r.row_hi || r.col_lo > r.col_hi || r.row_hi >= m || r.col_hi >= n {
                return Err(TvError::argument(format!("rectangle {r:?} does not fit a {m}x{n} grid")));
            }
            for i in r.row_lo..=r.row_hi {
                for j in r.col_lo..=r.col_hi {
                    hits[i * n + j] = hits[i * n + j].saturating_add(1);
                }
            }
        }
        if let Some(k) = hits.iter().position(|&h| h != 1) {
            let what = if hits[k] == 0 { "uncovered" } else { "covered more than once" };
            return Err(TvError::argument(format!("cell ({}, {}) is {what}", k / n, k % n)));
        }
        Ok(RectPartition { shape, rects })
    }

    /// A single block covering the grid.
    pub fn trivial(rows: usize, cols: usize) -> RectPartition {
        RectPartition { shape: (rows, cols), rects: vec![Rect::full(rows, cols)] }
    }

    /// One block per cell, row-major.
    pub fn singletons(rows: usize, cols: usize) -> RectPartition {
        let rects = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| Rect { row_lo: i, row_hi: i, col_lo: j, col_hi: j }))
            .collect();
        RectPartition { shape: (rows, cols), rects }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    /// JSON array of `{row_lo, row_hi, col_lo, col_hi}` objects.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.rects)?)
    }

    pub fn from_json(text: &str, shape: (usize, usize)) -> Result<RectPartition> {
        RectPartition::new(shape, serde_json::from_str(text)?)
    }
}

/// TV of the block of `theta` under `r`, without copying it.
fn block_tv(theta: &ImageMatrix, r: &Rect) -> f64 {
    let mut total = 0.0;
    for i in r.row_lo..=r.row_hi {
        let row = &theta.row(i)[r.col_lo..=r.col_hi];
        total += tv_1d(row);
        if i < r.row_hi {
            let below = &theta.row(i + 1)[r.col_lo..=r.col_hi];
            total += row.iter().zip(below).map(|(a, b)| (b - a).abs()).sum::<f64>();
        }
    }
    total
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(TvError::argument(format!("epsilon must be positive and finite, got {eps}")));
    }
    Ok(())
}

/// The `(TV, ε)` scheme: every returned block has `tv ≤ ε`.
pub fn greedy_tv_partition(theta: &ImageMatrix, eps: f64) -> Result<RectPartition> {
    check_epsilon(eps)?;
    Ok(greedy_tv_partition_unchecked(theta, eps))
}

fn greedy_tv_partition_unchecked(theta: &ImageMatrix, eps: f64) -> RectPartition {
    let mut rects = Vec::new();
    let mut stack = vec![Rect::full(theta.rows(), theta.cols())];
    while let Some(r) = stack.pop() {
        if r.area() == 1 || block_tv(theta, &r) <= eps {
            rects.push(r);
        } else {
            stack.extend(r.quadrants().into_iter().rev());
        }
    }
    RectPartition { shape: theta.shape(), rects }
}

/// `1 + 3·log2(n)·tv/ε`, with `n` the longer side.
pub fn partition_count_bound(theta: &ImageMatrix, eps: f64) -> f64 {
    let n = theta.rows().max(theta.cols()) as f64;
    1.0 + 3.0 * n.log2() * crate::grid::tv(theta) / eps
}

/// Superadditive functionals for the 1D scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceFunctional {
    /// Split a matrix into column blocks, scoring each by its horizontal TV.
    TvRowsOfColumns,
    /// Split a matrix into row blocks, scoring each by its vertical TV.
    TvColsOfRows,
    /// Split a vector (a single-row matrix) into segments by 1D TV.
    VectorTv,
}

impl SequenceFunctional {
    pub fn as_str(self) -> &'static str {
        match self {
            SequenceFunctional::TvRowsOfColumns => "tv_rows_of_columns",
            SequenceFunctional::TvColsOfRows => "tv_cols_of_rows",
            SequenceFunctional::VectorTv => "vector_tv",
        }
    }
}

impl FromStr for SequenceFunctional {
    type Err = TvError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tv_rows_of_columns" => Ok(SequenceFunctional::TvRowsOfColumns),
            "tv_cols_of_rows" => Ok(SequenceFunctional::TvColsOfRows),
            "vector_tv" => Ok(SequenceFunctional::VectorTv),
            other => Err(TvError::argument(format!("unknown functional {other:?}"))),
        }
    }
}

/// A contiguous inclusive range of sequence positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: usize,
    pub hi: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn sequence_len(t: SequenceFunctional, u: &ImageMatrix) -> Result<usize> {
    match t {
        SequenceFunctional::TvRowsOfColumns => Ok(u.cols()),
        SequenceFunctional::TvColsOfRows => Ok(u.rows()),
        SequenceFunctional::VectorTv if u.rows() == 1 => Ok(u.cols()),
        SequenceFunctional::VectorTv => Err(TvError::argument(format!("vector_tv expects a single row, got {} rows", u.rows()))),
    }
}

/// `T` of the piece `seg` of `u`.
pub fn sequence_functional(t: SequenceFunctional, u: &ImageMatrix, seg: Segment) -> f64 {
    match t {
        SequenceFunctional::TvRowsOfColumns => (0..u.rows()).map(|i| tv_1d(&u.row(i)[seg.lo..=seg.hi])).sum(),
        SequenceFunctional::TvColsOfRows => (seg.lo..seg.hi)
            .map(|i| u.row(i).iter().zip(u.row(i + 1)).map(|(a, b)| (b - a).abs()).sum::<f64>())
            .sum(),
        SequenceFunctional::VectorTv => tv_1d(&u.row(0)[seg.lo..=seg.hi]),
    }
}

/// The `(T, ε)` scheme: every returned segment has `T ≤ ε`, in order.
pub fn greedy_1d_partition(t: SequenceFunctional, u: &ImageMatrix, eps: f64) -> Result<Vec<Segment>> {
    check_epsilon(eps)?;
    let len = sequence_len(t, u)?;
    let mut out = Vec::new();
    let mut stack = vec![Segment { lo: 0, hi: len - 1 }];
    while let Some(seg) = stack.pop() {
        if seg.len() == 1 || sequence_functional(t, u, seg) <= eps {
            out.push(seg);
        } else {
            let mid = seg.lo + seg.len() / 2;
            stack.push(Segment { lo: mid, hi: seg.hi });
            stack.push(Segment { lo: seg.lo, hi: mid - 1 });
        }
    }
    Ok(out)
}

/// `log2(4·len)·(1 + T(U)/ε)`
pub fn segment_count_bound(t: SequenceFunctional, u: &ImageMatrix, eps: f64) -> Result<f64> {
    let len = sequence_len(t, u)?;
    let total = sequence_functional(t, u, Segment { lo: 0, hi: len - 1 });
    Ok((4.0 * len as f64).log2() * (1.0 + total / eps))
}

/// Replaces each segment of `values` by its mean.
pub fn segment_average(values: &[f64], segments: &[Segment]) -> Result<Vec<f64>> {
    let mut out = vec![f64::NAN; values.len()];
    for s in segments {
        if s.lo > s.hi || s.hi >= values.len() {
            return Err(TvError::argument(format!("segment {s:?} outside a vector of length {}", values.len())));
        }
        let mean = values[s.lo..=s.hi].iter().sum::<f64>() / s.len() as f64;
        out[s.lo..=s.hi].iter_mut().for_each(|v| *v = mean);
    }
    if out.iter().any(|v| v.is_nan()) {
        return Err(TvError::argument("segments do not cover the vector"));
    }
    Ok(out)
}

/// Replaces each block of `theta` by its mean.
pub fn block_average(theta: &ImageMatrix, partition: &RectPartition) -> Result<ImageMatrix> {
    if theta.shape() != partition.shape() {
        let (m, n) = partition.shape();
        return Err(TvError::argument(format!(
            "partition of a {m}x{n} grid applied to a {}x{} matrix",
            theta.rows(),
            theta.cols()
        )));
    }
    let cols = theta.cols();
    let mut out = theta.values().to_vec();
    for r in partition.rects() {
        let mut sum = 0.0;
        for i in r.row_lo..=r.row_hi {
            sum += theta.row(i)[r.col_lo..=r.col_hi].iter().sum::<f64>();
        }
        let mean = sum / r.area() as f64;
        for i in r.row_lo..=r.row_hi {
            out[i * cols + r.col_lo..=i * cols + r.col_hi].iter_mut().for_each(|v| *v = mean);
        }
    }
    ImageMatrix::new(theta.rows(), theta.cols(), out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GnsBound {
    /// `Σ (θ_ij − θ̄)²`
    pub lhs: f64,
    /// `(5 + 4mn/min(m,n)²)·tv(θ)²`
    pub rhs: f64,
}

impl GnsBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Both sides of the discrete Gagliardo–Nirenberg–Sobolev inequality.
pub fn gns_bound(theta: &ImageMatrix) -> GnsBound {
    let t = crate::grid::tv(theta);
    // zero TV means bitwise-equal entries; skip the rounding in the mean
    let lhs = if t == 0.0 {
        0.0
    } else {
        let mean = theta.mean();
        theta.values().iter().map(|v| (v - mean) * (v - mean)).sum()
    };
    let (m, n) = (theta.rows() as f64, theta.cols() as f64);
    GnsBound { lhs, rhs: (5.0 + 4.0 * m * n / m.min(n).powi(2)) * t * t }
}

/// Partition constant in the `η` formula.
pub const NET_PARTITION_CONSTANT: f64 = 3.0;

/// An ε-net point together with the construction that produced it.
#[derive(Clone, Debug)]
pub struct NetPoint {
    pub representative: ImageMatrix,
    pub partition: RectPartition,
    /// Threshold used for the greedy partition.
    pub eta: f64,
    /// Spacing of the quantization grid on `[−L, L]`.
    pub spacing: f64,
}

/// `min{ε²/(2C·tv·ln n), ε/√(2C·ln n)}`, with `n` the geometric mean side.
pub fn net_threshold(theta: &ImageMatrix, eps: f64) -> f64 {
    let side = ((theta.rows() * theta.cols()) as f64).sqrt();
    let log_n = side.ln();
    let c = NET_PARTITION_CONSTANT;
    let t = crate::grid::tv(theta);
    (eps * eps / (2.0 * c * t * log_n)).min(eps / (2.0 * c * log_n).sqrt())
}

/// Builds a net point within `2ε` of `theta`: greedy partition at the
/// threshold of [`net_threshold`] (halved until the block-average error is at
/// most `ε`), block averages, then rounding to a grid on `[−L, L]` with
/// spacing at most `ε/√(mn)`.
pub fn epsilon_net_point(theta: &ImageMatrix, eps: f64, bound: f64) -> Result<NetPoint> {
    check_epsilon(eps)?;
    if !(bound.is_finite() && bound > 0.0) {
        return Err(TvError::argument(format!("L must be positive and finite, got {bound}")));
    }
    if theta.max_abs() > bound {
        return Err(TvError::argument(format!("max |θ| = {} exceeds L = {bound}", theta.max_abs())));
    }
    let mut eta = net_threshold(theta, eps);
    let (partition, averaged) = loop {
        let p = greedy_tv_partition_unchecked(theta, eta);
        let avg = block_average(theta, &p)?;
        if theta.dist_sq(&avg)? <= eps * eps || p.len() == theta.len() {
            break (p, avg);
        }
        eta = if eta.is_finite() { 0.5 * eta } else { crate::grid::tv(theta) };
    };
    let side = ((theta.rows() * theta.cols()) as f64).sqrt();
    let steps = (2.0 * bound * side / eps).ceil().max(1.0);
    let spacing = 2.0 * bound / steps;
    let representative = averaged.map(|v| (-bound + ((v + bound) / spacing).round() * spacing).clamp(-bound, bound));
    Ok(NetPoint { representative, partition, eta, spacing })
}

pub fn epsilon_net_representative(theta: &ImageMatrix, eps: f64, bound: f64) -> Result<ImageMatrix> {
    Ok(epsilon_net_point(theta, eps, bound)?.representative)
}
