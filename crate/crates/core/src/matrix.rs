//! Dense row-major real matrices and the plain-CSV matrix file format.
//!
//! The file format has one line per matrix row, comma-separated decimal
//! literals, and no header. Dimensions are inferred from the content.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Result, TvError};

/// Formats a double with 17 significant digits, enough to round-trip exactly.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// A dense `rows × cols` matrix of finite reals stored in row-major order.
#[derive(Clone, PartialEq)]
pub struct ImageMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ImageMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(TvError::argument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(TvError::shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(TvError::argument(format!(
                "non-finite entry {} at ({}, {})",
                values[k],
                k / cols,
                k % cols
            )));
        }
        Ok(ImageMatrix { rows, cols, values })
    }

    /// Builds a matrix from values the caller already knows to be finite and
    /// correctly sized.
    pub(crate) fn from_raw(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        debug_assert!(rows > 0 && cols > 0);
        ImageMatrix { rows, cols, values }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return Err(TvError::shape(format!(
                "row {i} has {} entries, expected {n}",
                rows[i].len()
            )));
        }
        ImageMatrix::new(m, n, rows.concat())
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        ImageMatrix::new(rows, cols, vec![value; rows * cols])
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        ImageMatrix::filled(rows, cols, 0.0)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        ImageMatrix::new(rows, cols, values)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; matrices have at least one entry.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Squared Frobenius norm.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &ImageMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    /// Squared Frobenius distance `‖self − other‖²`.
    pub fn dist_sq(&self, other: &ImageMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }

    pub fn sup_dist(&self, other: &ImageMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn add(&self, other: &ImageMatrix) -> Result<ImageMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ImageMatrix) -> Result<ImageMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, a: f64) -> ImageMatrix {
        self.map(|v| a * v)
    }

    pub fn add_scalar(&self, c: f64) -> ImageMatrix {
        self.map(|v| v + c)
    }

    /// `self + a·other`
    pub fn axpy(&self, a: f64, other: &ImageMatrix) -> Result<ImageMatrix> {
        self.zip_with(other, |x, y| x + a * y)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ImageMatrix {
        ImageMatrix::from_raw(self.rows, self.cols, self.values.iter().map(|&v| f(v)).collect())
    }

    fn zip_with(&self, other: &ImageMatrix, f: impl Fn(f64, f64) -> f64) -> Result<ImageMatrix> {
        self.check_same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(ImageMatrix::from_raw(self.rows, self.cols, values))
    }

    /// Copies the inclusive block `[row_lo, row_hi] × [col_lo, col_hi]`.
    pub fn block(&self, row_lo: usize, row_hi: usize, col_lo: usize, col_hi: usize) -> Result<ImageMatrix> {
        if row_lo > row_hi || col_lo > col_hi || row_hi >= self.rows || col_hi >= self.cols {
            return Err(TvError::shape(format!(
                "block [{row_lo},{row_hi}]x[{col_lo},{col_hi}] outside {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let mut values = Vec::with_capacity((row_hi - row_lo + 1) * (col_hi - col_lo + 1));
        for i in row_lo..=row_hi {
            values.extend_from_slice(&self.values[i * self.cols + col_lo..=i * self.cols + col_hi]);
        }
        Ok(ImageMatrix::from_raw(row_hi - row_lo + 1, col_hi - col_lo + 1, values))
    }

    pub fn transpose(&self) -> ImageMatrix {
        let mut values = Vec::with_capacity(self.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                values.push(self.get(i, j));
            }
        }
        ImageMatrix::from_raw(self.cols, self.rows, values)
    }

    pub fn check_same_shape(&self, other: &ImageMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(TvError::shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Parses the plain-CSV format. Row numbers in errors are 1-based lines.
    pub fn parse_csv(text: &str) -> Result<ImageMatrix> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let row = e.position().map_or(rows.len() as u64 + 1, |p| p.line());
                TvError::Csv { row, message: e.to_string() }
            })?;
            let row = record.position().map_or(rows.len() as u64 + 1, |p| p.line());
            if record.len() == 1 && record[0].is_empty() {
                continue;
            }
            let parsed = record
                .iter()
                .map(|field| {
                    field
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| TvError::Csv {
                            row,
                            message: format!("'{field}' is not a finite decimal number"),
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(parsed);
        }
        if rows.is_empty() {
            return Err(TvError::Csv { row: 1, message: "no rows".into() });
        }
        ImageMatrix::from_rows(&rows)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<ImageMatrix> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| TvError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ImageMatrix::parse_csv(&text)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.len() * 24);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|&v| format_f64(v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|source| TvError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

impl fmt::Debug for ImageMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ImageMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row: Vec<String> = self.row(i).iter().take(8).map(|v| format!("{v:.4}")).collect();
            let more = if self.cols > 8 { ", ..." } else { "" };
            writeln!(f, "  [{}{more}]", row.join(", "))?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}
