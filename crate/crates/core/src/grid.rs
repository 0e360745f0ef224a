//! Grid-graph edges and the total-variation functionals.
//!
//! Edges are indexed in a fixed canonical order: every horizontal edge in
//! row-major order of its left endpoint, then every vertical edge in
//! row-major order of its upper endpoint. For an edge `e` the head `e⁺` is the
//! right (horizontal) or lower (vertical) neighbour of the anchor `e⁻`, and
//! the edge gradient is `θ(e⁺) − θ(e⁻)`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TvError};
use crate::matrix::ImageMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// An edge of the `rows × cols` grid graph, identified by its anchor `e⁻`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeIndex {
    pub orientation: Orientation,
    pub row: usize,
    pub col: usize,
}

impl EdgeIndex {
    pub fn horizontal(row: usize, col: usize) -> Self {
        EdgeIndex { orientation: Orientation::Horizontal, row, col }
    }

    pub fn vertical(row: usize, col: usize) -> Self {
        EdgeIndex { orientation: Orientation::Vertical, row, col }
    }

    /// The anchor vertex `e⁻`.
    pub fn tail(&self) -> (usize, usize) {
        (self.row, self.col)
    }

    /// The head vertex `e⁺`.
    pub fn head(&self) -> (usize, usize) {
        match self.orientation {
            Orientation::Horizontal => (self.row, self.col + 1),
            Orientation::Vertical => (self.row + 1, self.col),
        }
    }

    pub fn is_valid(&self, rows: usize, cols: usize) -> bool {
        match self.orientation {
            Orientation::Horizontal => self.row < rows && self.col + 1 < cols,
            Orientation::Vertical => self.row + 1 < rows && self.col < cols,
        }
    }

    /// Position of this edge in the canonical ordering.
    pub fn position(&self, rows: usize, cols: usize) -> usize {
        match self.orientation {
            Orientation::Horizontal => self.row * (cols - 1) + self.col,
            Orientation::Vertical => horizontal_edge_count(rows, cols) + self.row * cols + self.col,
        }
    }

    pub fn from_position(pos: usize, rows: usize, cols: usize) -> Option<EdgeIndex> {
        let nh = horizontal_edge_count(rows, cols);
        if pos < nh {
            Some(EdgeIndex::horizontal(pos / (cols - 1), pos % (cols - 1)))
        } else if pos < edge_count(rows, cols) {
            let k = pos - nh;
            Some(EdgeIndex::vertical(k / cols, k % cols))
        } else {
            None
        }
    }
}

pub fn horizontal_edge_count(rows: usize, cols: usize) -> usize {
    rows * cols.saturating_sub(1)
}

pub fn vertical_edge_count(rows: usize, cols: usize) -> usize {
    rows.saturating_sub(1) * cols
}

/// `m(n−1) + n(m−1)`; equals `2n(n−1)` on a square grid.
pub fn edge_count(rows: usize, cols: usize) -> usize {
    horizontal_edge_count(rows, cols) + vertical_edge_count(rows, cols)
}

/// All edges of the grid in canonical order.
pub fn edges(rows: usize, cols: usize) -> impl Iterator<Item = EdgeIndex> {
    let horizontal = (0..rows).flat_map(move |i| (0..cols.saturating_sub(1)).map(move |j| EdgeIndex::horizontal(i, j)));
    let vertical = (0..rows.saturating_sub(1)).flat_map(move |i| (0..cols).map(move |j| EdgeIndex::vertical(i, j)));
    horizontal.chain(vertical)
}

pub fn edge_gradient(theta: &ImageMatrix, e: EdgeIndex) -> Result<f64> {
    if !e.is_valid(theta.rows(), theta.cols()) {
        return Err(TvError::shape(format!(
            "{e:?} is not an edge of a {}x{} grid",
            theta.rows(),
            theta.cols()
        )));
    }
    let (hi, hj) = e.head();
    Ok(theta.get(hi, hj) - theta.get(e.row, e.col))
}

/// All edge gradients `Dθ` in canonical order.
pub fn gradients(theta: &ImageMatrix) -> Vec<f64> {
    let (m, n) = theta.shape();
    let v = theta.values();
    let mut out = Vec::with_capacity(edge_count(m, n));
    for i in 0..m {
        let row = &v[i * n..(i + 1) * n];
        out.extend(row.windows(2).map(|w| w[1] - w[0]));
    }
    for i in 0..m.saturating_sub(1) {
        let (top, bottom) = (&v[i * n..(i + 1) * n], &v[(i + 1) * n..(i + 2) * n]);
        out.extend(top.iter().zip(bottom).map(|(a, b)| b - a));
    }
    out
}

/// Total variation along rows: the sum of absolute horizontal differences.
pub fn tv_rows(theta: &ImageMatrix) -> f64 {
    let n = theta.cols();
    theta
        .values()
        .chunks_exact(n)
        .map(tv_1d)
        .sum()
}

/// Total variation along columns: the sum of absolute vertical differences.
pub fn tv_cols(theta: &ImageMatrix) -> f64 {
    let n = theta.cols();
    let v = theta.values();
    let mut total = 0.0;
    for i in 0..theta.rows().saturating_sub(1) {
        let (top, bottom) = (&v[i * n..(i + 1) * n], &v[(i + 1) * n..(i + 2) * n]);
        total += top.iter().zip(bottom).map(|(a, b)| (b - a).abs()).sum::<f64>();
    }
    total
}

/// Unnormalized total variation `Σ_{(u,v)∈E} |θ_u − θ_v|`.
pub fn tv(theta: &ImageMatrix) -> f64 {
    tv_rows(theta) + tv_cols(theta)
}

/// Canonically scaled total variation `tv(θ)/n`, defined for square matrices.
pub fn tv_norm(theta: &ImageMatrix) -> Result<f64> {
    if !theta.is_square() {
        return Err(TvError::shape(format!(
            "tv_norm needs a square matrix, got {}x{}",
            theta.rows(),
            theta.cols()
        )));
    }
    Ok(tv(theta) / theta.cols() as f64)
}

/// Total variation of a vector (a path graph).
pub fn tv_1d(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}
