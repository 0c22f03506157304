//! Dense complex matrices for channels and receive filters.
//!
//! Everything in the simulator is at most a few dozen rows or columns, so a
//! single row-major representation with schoolbook products and an LDL^H
//! solve covers all needs. Empty (zero-sized) shapes are allowed; they stand
//! in for the RIS channels when no RIS is present.

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Relative pivot threshold for Hermitian factorizations: a pivot whose
/// magnitude falls below this fraction of the largest initial diagonal entry
/// makes the solve fail with [`CoreError::Singular`].
pub const PIVOT_RTOL: f64 = 1e-12;

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting NaN/infinite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(CoreError::DimensionMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        for (idx, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                // cols > 0 whenever any entry exists.
                return Err(CoreError::NonFinite {
                    row: idx / cols,
                    col: idx % cols,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix by evaluating `f(row, col)` for every entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        out
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Entrywise scaling by a complex factor.
    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Entrywise sum.
    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(CoreError::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Standard complex matrix product.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(CoreError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut sum = Complex64::new(0.0, 0.0);
                for k in 0..self.cols {
                    sum += self.get(i, k) * rhs.get(k, j);
                }
                out.data[i * rhs.cols + j] = sum;
            }
        }
        Ok(out)
    }

    /// Scales column `k` by `factors[k]`.
    pub fn scale_columns(&self, factors: &[Complex64]) -> Result<Self> {
        if factors.len() != self.cols {
            return Err(CoreError::DimensionMismatch(format!(
                "{} column factors for a {}x{} matrix",
                factors.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = self.clone();
        if self.cols > 0 {
            for row in out.data.chunks_mut(self.cols) {
                for (entry, factor) in row.iter_mut().zip(factors) {
                    *entry *= factor;
                }
            }
        }
        Ok(out)
    }

    /// Copies the listed columns, in the given order, into a new matrix.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        assert!(
            columns.iter().all(|&c| c < self.cols),
            "column index out of range"
        );
        let mut out = Self::zeros(self.rows, columns.len());
        for r in 0..self.rows {
            for (j, &c) in columns.iter().enumerate() {
                out.data[r * columns.len() + j] = self.get(r, c);
            }
        }
        out
    }

    /// Largest entry magnitude (max norm); 0 for empty matrices.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Solves `A x = b` for Hermitian positive-definite `A` (self) via an
    /// LDL^H factorization; `b` may carry multiple right-hand-side columns.
    ///
    /// Only the lower triangle and the real part of the diagonal are read.
    /// Fails with [`CoreError::Singular`] when a pivot magnitude drops below
    /// [`PIVOT_RTOL`] times the largest initial diagonal entry.
    pub fn solve_hermitian(&self, rhs: &Self) -> Result<Self> {
        let n = self.rows;
        if self.cols != n {
            return Err(CoreError::DimensionMismatch(format!(
                "hermitian solve needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if rhs.rows != n {
            return Err(CoreError::DimensionMismatch(format!(
                "right-hand side has {} rows, expected {}",
                rhs.rows, n
            )));
        }
        if n == 0 {
            return Ok(Self::zeros(0, rhs.cols));
        }
        let (lower, diag) = self.ldl_factor()?;

        let mut out = Self::zeros(n, rhs.cols);
        let mut work = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..rhs.cols {
            // L y = b
            for i in 0..n {
                let mut v = rhs.get(i, c);
                for j in 0..i {
                    v -= lower[i * n + j] * work[j];
                }
                work[i] = v;
            }
            // D z = y
            for i in 0..n {
                work[i] /= diag[i];
            }
            // L^H x = z
            for i in (0..n).rev() {
                let mut v = work[i];
                for j in i + 1..n {
                    v -= lower[j * n + i].conj() * work[j];
                }
                work[i] = v;
            }
            for (i, &v) in work.iter().enumerate() {
                out.data[i * rhs.cols + c] = v;
            }
        }
        Ok(out)
    }

    /// Base-2 log-determinant of a Hermitian positive-definite matrix,
    /// computed as the sum of log2 pivots of the LDL^H factorization.
    pub fn log_det_hermitian(&self) -> Result<f64> {
        if self.cols != self.rows {
            return Err(CoreError::DimensionMismatch(format!(
                "log-determinant needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.rows == 0 {
            return Ok(0.0);
        }
        let (_, diag) = self.ldl_factor()?;
        if diag.iter().any(|&d| d <= 0.0) {
            return Err(CoreError::Singular);
        }
        Ok(diag.iter().map(|d| d.log2()).sum())
    }

    /// Unit-lower-triangular L (row-major) and real pivots D with A = L D L^H.
    fn ldl_factor(&self) -> Result<(Vec<Complex64>, Vec<f64>)> {
        let n = self.rows;
        let max_diag = (0..n).map(|k| self.get(k, k).re.abs()).fold(0.0, f64::max);
        if max_diag <= 0.0 {
            return Err(CoreError::Singular);
        }
        let tol = PIVOT_RTOL * max_diag;

        let mut lower = vec![Complex64::new(0.0, 0.0); n * n];
        let mut diag = vec![0.0f64; n];
        for k in 0..n {
            let mut d = self.get(k, k).re;
            for j in 0..k {
                d -= lower[k * n + j].norm_sqr() * diag[j];
            }
            if d.abs() < tol {
                return Err(CoreError::Singular);
            }
            diag[k] = d;
            lower[k * n + k] = Complex64::new(1.0, 0.0);
            for i in k + 1..n {
                let mut v = self.get(i, k);
                for j in 0..k {
                    v -= lower[i * n + j] * lower[k * n + j].conj() * diag[j];
                }
                lower[i * n + k] = v / d;
            }
        }
        Ok((lower, diag))
    }
}
