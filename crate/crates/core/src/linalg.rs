//! Dense row-major matrices and a growable lower-triangular Cholesky factor.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular `L` with `L Lᵀ = A`, stored packed row by row so that
/// appending a row (a new point) is a single forward substitution.
#[derive(Debug, Clone, Default)]
pub struct CholeskyFactor {
    n: usize,
    packed: Vec<f64>,
}

impl CholeskyFactor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Factorizes a symmetric positive definite matrix.
    pub fn decompose(a: &Matrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: a.cols(),
            });
        }
        let mut factor = Self::new();
        for i in 0..a.rows() {
            factor.push_row(&a.row(i)[..i], a[(i, i)])?;
        }
        Ok(factor)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.packed[start..start + i + 1]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.row(i)[i]
    }

    /// Extends `A` by one row/column: `off_diag` holds the new entries
    /// `A[n][0..n]` and `diag` is `A[n][n]`.
    pub fn push_row(&mut self, off_diag: &[f64], diag: f64) -> Result<()> {
        let l = self.forward_solve(off_diag);
        self.push_solved_row(l, diag)
    }

    /// Like [`push_row`](Self::push_row) when `L⁻¹ a` is already known.
    pub fn push_solved_row(&mut self, solved: Vec<f64>, diag: f64) -> Result<()> {
        debug_assert_eq!(solved.len(), self.n);
        let pivot = diag - dot(&solved, &solved);
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: self.n });
        }
        self.packed.extend_from_slice(&solved);
        self.packed.push(pivot.sqrt());
        self.n += 1;
        Ok(())
    }

    /// Solves `L z = b`.
    pub fn forward_solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "right-hand side length");
        let mut z = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let s = b[i] - dot(&row[..i], &z);
            z.push(s / row[i]);
        }
        z
    }

    /// Recomputes `z[start..]` of `L z = b` when `z[..start]` is already
    /// correct.
    pub fn forward_solve_tail(&self, b: &[f64], z: &mut [f64], start: usize) {
        assert!(b.len() == self.n && z.len() == self.n, "right-hand side length");
        for i in start..self.n {
            let row = self.row(i);
            z[i] = (b[i] - dot(&row[..i], &z[..i])) / row[i];
        }
    }

    /// Solves `Lᵀ x = z`.
    pub fn backward_solve(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n, "right-hand side length");
        let mut x = z.to_vec();
        for i in (0..self.n).rev() {
            x[i] /= self.diag(i);
            let xi = x[i];
            let row = self.row(i);
            for (xj, lij) in x[..i].iter_mut().zip(row) {
                *xj -= lij * xi;
            }
        }
        x
    }

    /// Solves `L Lᵀ x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward_solve(&self.forward_solve(b))
    }

    /// `log det(L Lᵀ)` from the diagonal.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.diag(i).ln()).sum::<f64>()
    }

    /// `tr((L Lᵀ)⁻¹) = ‖L⁻¹‖²_F`.
    pub fn inverse_trace(&self) -> f64 {
        let mut total = 0.0;
        let mut e = vec![0.0; self.n];
        for j in 0..self.n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            // column j of L⁻¹ is zero above row j
            let col = self.forward_solve(&e);
            total += col[j..].iter().map(|v| v * v).sum::<f64>();
        }
        total
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| if j <= i { self.row(i)[j] } else { 0.0 })
    }

    /// `L Lᵀ`, for checking the factorization.
    pub fn reconstruct(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| {
            let m = i.min(j);
            dot(&self.row(i)[..=m], &self.row(j)[..=m])
        })
    }
}
