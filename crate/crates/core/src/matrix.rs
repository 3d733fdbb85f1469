//! Minimal dense, column-major matrix of `f64`.
//!
//! Just enough linear algebra to support the segmentation pipeline: storage,
//! products, transposes and a few norms. Nothing here allocates beyond the
//! obvious, and all layouts are column-major so a data point (a column) is a
//! contiguous slice.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// An `rows x cols` matrix of zeros.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// The `n x n` identity.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds an `rows x cols` matrix by evaluating `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row slices; every row must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "row 0 has {ncols} entries but row {i} has {}",
                    row.len()
                )));
            }
        }
        Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    /// Assembles a matrix whose columns are the given equally-sized slices.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let ncols = columns.len();
        let nrows = columns.first().map_or(0, Vec::len);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != nrows {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "column 0 has {nrows} entries but column {j} has {}",
                    col.len()
                )));
            }
        }
        Ok(Matrix::from_fn(nrows, ncols, |i, j| columns[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[col * self.rows + row] = value;
    }

    /// The `col`-th column as a contiguous slice.
    #[inline]
    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    #[inline]
    pub fn column_mut(&mut self, col: usize) -> &mut [f64] {
        &mut self.data[col * self.rows..(col + 1) * self.rows]
    }

    /// Flat column-major view of the entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Mutable access to two distinct columns at once, `a < b`.
    pub(crate) fn two_columns_mut(&mut self, a: usize, b: usize) -> (&mut [f64], &mut [f64]) {
        debug_assert!(a < b && b < self.cols);
        let (head, tail) = self.data.split_at_mut(b * self.rows);
        (&mut head[a * self.rows..(a + 1) * self.rows], &mut tail[..self.rows])
    }

    pub fn transposed(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Matrix product `self * rhs`.
    pub fn multiply(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(alloc::format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            for k in 0..self.cols {
                let scale = rhs.get(k, j);
                if scale == 0.0 {
                    continue;
                }
                let lhs_col = self.column(k);
                let out_col = out.column_mut(j);
                for i in 0..self.rows {
                    out_col[i] += lhs_col[i] * scale;
                }
            }
        }
        Ok(out)
    }

    /// Frobenius norm, `sqrt(sum of squared entries)`.
    pub fn frobenius_norm(&self) -> f64 {
        let sum: f64 = self.data.iter().map(|x| x * x).sum();
        num_traits::Float::sqrt(sum)
    }

    /// Position of the first non-finite entry, if any (column-major scan).
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|x| !x.is_finite())
            .map(|pos| (pos % self.rows, pos / self.rows))
    }

    /// Errors with [`Error::NonFinite`] if any entry is NaN or infinite.
    pub fn ensure_finite(&self) -> Result<()> {
        match self.find_non_finite() {
            Some((row, col)) => Err(Error::NonFinite { row, col }),
            None => Ok(()),
        }
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (row, col): (usize, usize)) -> &f64 {
        &self.data[col * self.rows + row]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (row, col): (usize, usize)) -> &mut f64 {
        &mut self.data[col * self.rows + row]
    }
}

/// Dot product of two equally long slices.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm of a slice.
#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    num_traits::Float::sqrt(dot(a, a))
}
