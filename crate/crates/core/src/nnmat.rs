//! Dense nonnegative matrix with the entrywise and columnwise-shift
//! operations every update rule is built from.
//!
//! Storage is row-major `f64`. The workloads here are small and dense
//! (at most ~1000x100), so shifts materialize new matrices and the
//! multiply kernels are plain loops.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense K x N matrix with every entry >= 0.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl NonnegMatrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    /// Matrix with every entry set to `value` (must be >= 0 and finite).
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert!(value >= 0.0 && value.is_finite());
        NonnegMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Build from row-major data, validating length and nonnegativity.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix("dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix("data length != rows * cols"));
        }
        if data.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidMatrix("entries must be finite and >= 0"));
        }
        Ok(NonnegMatrix { rows, cols, data })
    }

    /// Build from nested row slices; convenient in tests.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidMatrix("dimensions must be positive"));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidMatrix("ragged rows"));
        }
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_vec(rows.len(), cols, data)
    }

    /// Fill entrywise from a generator called in row-major order.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0);
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let x = f(r, c);
                assert!(x >= 0.0 && x.is_finite(), "generator produced invalid entry");
                data.push(x);
            }
        }
        NonnegMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        assert!(value >= 0.0 && value.is_finite());
        self.data[r * self.cols + c] = value;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Columnwise right shift by `m`, vacated columns filled with zeros.
    /// Size-preserving; `m >= cols` yields the zero matrix.
    pub fn right_shift(&self, m: usize) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        if m >= self.cols {
            return out;
        }
        for r in 0..self.rows {
            let src = &self.data[r * self.cols..r * self.cols + self.cols - m];
            out.data[r * self.cols + m..(r + 1) * self.cols].copy_from_slice(src);
        }
        out
    }

    /// Columnwise left shift by `m`, vacated columns filled with zeros.
    pub fn left_shift(&self, m: usize) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        if m >= self.cols {
            return out;
        }
        for r in 0..self.rows {
            let src = &self.data[r * self.cols + m..(r + 1) * self.cols];
            out.data[r * self.cols..r * self.cols + self.cols - m].copy_from_slice(src);
        }
        out
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_same_shape("hadamard", other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b)
            .collect();
        Ok(NonnegMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Entrywise power. For negative exponents the base is clamped to
    /// `eps` before exponentiation so shifted-in zeros stay finite.
    /// `0^0` is defined as 1.
    pub fn entrywise_pow(&self, p: f64, eps: f64) -> Self {
        let data: Vec<f64> = if p == 0.0 {
            vec![1.0; self.data.len()]
        } else if p == 1.0 {
            self.data.clone()
        } else if p < 0.0 {
            self.data.iter().map(|&a| libm::pow(a.max(eps), p)).collect()
        } else {
            self.data.iter().map(|&a| libm::pow(a, p)).collect()
        };
        NonnegMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Entrywise `a / max(b, eps)`.
    pub fn safe_divide(&self, other: &Self, eps: f64) -> Result<Self> {
        self.check_same_shape("safe_divide", other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a / b.max(eps))
            .collect();
        Ok(NonnegMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Plain matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimMismatch {
                op: "matmul",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * other`, avoiding an explicit transpose.
    pub fn matmul_at(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimMismatch {
                op: "matmul_at",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i];
                if a == 0.0 {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * other^T`; both inner loops run over contiguous rows.
    pub fn matmul_bt(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimMismatch {
                op: "matmul_bt",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.rows);
        for r in 0..self.rows {
            let a_row = &self.data[r * self.cols..(r + 1) * self.cols];
            for j in 0..other.rows {
                let b_row = &other.data[j * other.cols..(j + 1) * other.cols];
                let mut acc = 0.0;
                for (x, y) in a_row.iter().zip(b_row) {
                    acc += x * y;
                }
                out.data[r * other.rows + j] = acc;
            }
        }
        Ok(out)
    }

    /// Entrywise `self += other`.
    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_same_shape("add_assign", other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    /// Entrywise scaling by a nonnegative factor.
    pub fn scale(&mut self, factor: f64) {
        assert!(factor >= 0.0 && factor.is_finite());
        for a in &mut self.data {
            *a *= factor;
        }
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub(crate) fn check_same_shape(&self, op: &'static str, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimMismatch {
                op,
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        Ok(())
    }

    /// Maximum relative entrywise difference, with the denominator floored
    /// at 1 to keep near-zero entries from dominating.
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs() / a.abs().max(b.abs()).max(1.0))
            .fold(0.0, f64::max)
    }
}
