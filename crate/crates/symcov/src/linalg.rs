//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex<f64>>;

pub fn to_complex(m: &Mat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| Complex::new(m[(i, j)], 0.0))
}

/// Largest entry magnitude.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

pub fn max_abs_complex(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Largest imaginary-part magnitude.
pub fn max_imag(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()))
}

/// Drops imaginary parts after checking they are numerically negligible
/// relative to the matrix scale.
pub fn real_part_checked(m: &CMat, tol: f64) -> Result<Mat> {
    let scale = max_abs_complex(m).max(1.0);
    let imag = max_imag(m);
    if imag > tol * scale {
        return Err(Error::Numeric(format!(
            "imaginary residue {imag:.3e} exceeds {:.3e}",
            tol * scale
        )));
    }
    Ok(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re))
}

pub fn is_square(m: &Mat) -> bool {
    m.nrows() == m.ncols()
}

pub fn is_symmetric(m: &Mat, tol: f64) -> bool {
    if !is_square(m) {
        return false;
    }
    let scale = max_abs(m).max(1.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

pub fn symmetric_part(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &Mat) -> Vec<f64> {
    let mut vals: Vec<f64> = symmetric_part(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    vals
}

pub fn min_eigenvalue_sym(m: &Mat) -> f64 {
    symmetric_eigenvalues(m)[0]
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let herm = (m + m.adjoint()) * Complex::new(0.5, 0.0);
    let mut vals: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    vals
}

/// Soft-thresholds the off-diagonal entries in place; the diagonal is never
/// touched.
pub fn soft_threshold_off_diagonal(m: &mut Mat, kappa: f64) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = m[(i, j)];
            m[(i, j)] = if v > kappa {
                v - kappa
            } else if v < -kappa {
                v + kappa
            } else {
                0.0
            };
        }
    }
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(m: &Mat) -> Result<Mat> {
    m.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Numeric("matrix is not positive definite".into()))
}

/// Log-determinant of a symmetric positive definite matrix via Cholesky.
pub fn spd_log_det(m: &Mat) -> Result<f64> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numeric("matrix is not positive definite".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>())
}
