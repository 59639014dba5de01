//! Dense Gaussian elimination with partial pivoting.

use crate::error::{Error, Result};

/// Pivots smaller than this (after row exchange) mark the system singular.
/// Matrices here are `I - Q` for a substochastic `Q`, so entries are O(1).
pub const PIVOT_TOL: f64 = 1e-12;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves `self · x = rhs` in place, consuming the matrix.
    pub fn solve(mut self, mut rhs: Vec<f64>) -> Result<Vec<f64>> {
        let n = self.dim;
        assert_eq!(rhs.len(), n, "rhs length must match the matrix");
        for col in 0..n {
            let (pivot_row, pivot) = (col..n)
                .map(|r| (r, self[(r, col)].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot < PIVOT_TOL {
                return Err(Error::SingularSystem { pivot });
            }
            if pivot_row != col {
                for k in 0..n {
                    self.data.swap(col * n + k, pivot_row * n + k);
                }
                rhs.swap(col, pivot_row);
            }
            let p = self[(col, col)];
            for r in col + 1..n {
                let factor = self[(r, col)] / p;
                if factor == 0.0 {
                    continue;
                }
                for k in col..n {
                    self.data[r * n + k] -= factor * self.data[col * n + k];
                }
                rhs[r] -= factor * rhs[col];
            }
        }
        for col in (0..n).rev() {
            let mut acc = rhs[col];
            for k in col + 1..n {
                acc -= self[(col, k)] * rhs[k];
            }
            rhs[col] = acc / self[(col, col)];
        }
        Ok(rhs)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.dim + c]
    }
}
