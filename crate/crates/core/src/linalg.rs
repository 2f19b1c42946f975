use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vector;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::invalid("matrix", "must have at least one row and column"));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(Error::invalid(
                "matrix",
                format!("row {i} has {} entries, expected {n_cols}", rows[i].len()),
            ));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries".into()));
        }
        Ok(Matrix {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        Matrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn mul_vec(&self, x: &Vector) -> Vector {
        debug_assert_eq!(x.dim(), self.cols);
        Vector::from_raw(
            self.data
                .chunks(self.cols)
                .map(|row| row.iter().zip(x.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// `self^T y`
    pub(crate) fn tr_mul_vec(&self, y: &Vector) -> Vector {
        debug_assert_eq!(y.dim(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (row, &yi) in self.data.chunks(self.cols).zip(y.iter()) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        Vector::from_raw(out)
    }

    /// `self^T self`
    pub(crate) fn gram(&self) -> Matrix {
        let n = self.cols;
        let mut data = vec![0.0; n * n];
        for row in self.data.chunks(self.cols) {
            for i in 0..n {
                for j in 0..n {
                    data[i * n + j] += row[i] * row[j];
                }
            }
        }
        Matrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub(crate) fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..i).all(|j| {
                    let (a, b) = (self.get(i, j), self.get(j, i));
                    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
                })
            })
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// Extreme eigenvalues of a symmetric matrix.
    pub(crate) fn symmetric_eigen_range(&self) -> (f64, f64) {
        let eig = SymmetricEigen::new(self.to_dmatrix());
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (min, max)
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration.
///
/// Stops once the eigen-residual `|Bv - rho v|` falls below `rel_tol * rho`.
pub(crate) fn power_iteration_max_eigenvalue(m: &Matrix, rel_tol: f64) -> f64 {
    debug_assert_eq!(m.rows, m.cols);
    let n = m.cols;
    // Irregular start vector so it is not orthogonal to a structured top eigenvector.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * ((i as f64) * 1.3 + 0.5).sin()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut rho = 0.0;
    for _ in 0..1_000_000 {
        let w = m.mul_vec(&Vector::from_raw(v.clone()));
        rho = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        let w_norm = w.norm();
        if w_norm == 0.0 {
            return 0.0;
        }
        let residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - rho * b).powi(2))
            .sum::<f64>()
            .sqrt();
        v = w.iter().map(|x| x / w_norm).collect();
        if residual <= rel_tol * rho.abs() {
            break;
        }
    }
    rho
}

pub(crate) fn to_dvector(v: &Vector) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

pub(crate) fn from_dvector(v: &DVector<f64>) -> Vector {
    Vector::from_raw(v.iter().copied().collect())
}
