//! Thin wrappers over dense LU, symmetric eigenvalues and singular values.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, Side};

use crate::error::{Error, Result};

pub struct DenseLu {
    lu: PartialPivLu<f64>,
    dim: usize,
    norm1: f64,
}

impl DenseLu {
    pub fn factor(a: &Mat<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidArgument("LU of a non-square matrix".into()));
        }
        let mut finite = true;
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                finite &= a[(i, j)].is_finite();
            }
        }
        if !finite {
            return Err(Error::Singular("matrix has non-finite entries".into()));
        }
        let lu = a.partial_piv_lu();
        let u = lu.U();
        if (0..u.nrows()).any(|i| u[(i, i)] == 0.0) {
            return Err(Error::Singular("zero pivot".into()));
        }
        Ok(Self { lu, dim: a.nrows(), norm1: norm1(a) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::from_fn(self.dim, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        (0..self.dim).map(|i| x[(i, 0)]).collect()
    }

    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::from_fn(self.dim, 1, |i, _| b[i]);
        let x = self.lu.solve_transpose(&rhs);
        (0..self.dim).map(|i| x[(i, 0)]).collect()
    }

    /// Estimate of the 1-norm condition number (Hager's method with Higham's
    /// alternative test vector).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.dim;
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut est: f64 = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            est = est.max(y.iter().map(|v| v.abs()).sum());
            let xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&xi);
            let (j, zmax) = z.iter().enumerate().fold((0, 0.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x = vec![0.0; n];
            x[j] = 1.0;
        }
        let alt: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
            })
            .collect();
        let y = self.solve(&alt);
        let alt_est = 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        let inv = est.max(alt_est);
        if inv.is_finite() {
            inv * self.norm1
        } else {
            f64::INFINITY
        }
    }
}

/// Operator 1-norm (largest absolute column sum).
pub fn norm1(a: &Mat<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn mat_vec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}

/// Solves a small dense system.
pub fn solve_dense(a: &Mat<f64>, b: &[f64]) -> Result<Vec<f64>> {
    Ok(DenseLu::factor(a)?.solve(b))
}

/// Eigenvalues of the symmetric part of `a`, ascending.
pub fn symmetric_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    let s = Mat::from_fn(a.nrows(), a.ncols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    s.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Singular(format!("eigenvalue iteration failed: {e:?}")))
}

/// Singular values, descending.
pub fn singular_values(a: &Mat<f64>) -> Result<Vec<f64>> {
    a.singular_values().map_err(|e| Error::Singular(format!("SVD failed: {e:?}")))
}

/// 2-norm condition number from the singular values.
pub fn condition_number(a: &Mat<f64>) -> Result<f64> {
    let s = singular_values(a)?;
    let (Some(max), Some(min)) = (s.first(), s.last()) else {
        return Ok(1.0);
    };
    Ok(if *min == 0.0 { f64::INFINITY } else { max / min })
}
