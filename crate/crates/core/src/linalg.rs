//! Small dense linear-algebra helpers over nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(a)?;
    a.clone().cholesky().map(|c| c.l()).ok_or(Error::NotPositiveDefinite)
}

pub fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    let scale = a.amax().max(1.0);
    for i in 0..a.nrows() {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::NotPositiveDefinite);
            }
        }
    }
    Ok(())
}

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| e.eigenvalues[j].total_cmp(&e.eigenvalues[i]));
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(a.nrows(), order.len(), |r, c| e.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Multivariate normal density `N(z; 0, sigma)` with precomputed factors.
#[derive(Debug, Clone)]
pub struct GaussianDensity {
    precision: DMatrix<f64>,
    log_norm: f64,
}

impl GaussianDensity {
    pub fn new(sigma: &DMatrix<f64>) -> Result<Self> {
        let l = cholesky(sigma)?;
        let d = sigma.nrows() as f64;
        let log_det: f64 = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let l_inv = l.solve_lower_triangular(&DMatrix::identity(sigma.nrows(), sigma.nrows())).ok_or(Error::NotPositiveDefinite)?;
        let precision = l_inv.transpose() * l_inv;
        let log_norm = -0.5 * (d * (2.0 * std::f64::consts::PI).ln() + log_det);
        Ok(Self { precision, log_norm })
    }

    /// Density at `a - b`.
    pub fn eval_diff(&self, a: &[f64], b: &[f64]) -> f64 {
        let d = a.len();
        let mut q = 0.0;
        for i in 0..d {
            let zi = a[i] - b[i];
            let mut row = 0.0;
            for j in 0..d {
                row += self.precision[(i, j)] * (a[j] - b[j]);
            }
            q += zi * row;
        }
        (self.log_norm - 0.5 * q).exp()
    }
}

pub fn to_dmatrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidArgument("ragged matrix".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn from_dmatrix(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn vector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
