use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvalues and orthonormal eigenvectors (as columns) of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Eigen {
    pub fn min_value(&self) -> f64 {
        self.values.min()
    }

    pub fn max_value(&self) -> f64 {
        self.values.max()
    }
}

pub fn symmetric_eigen(h: &DMatrix<f64>) -> Result<Eigen> {
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let e = h
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("QR iteration did not converge".into()))?;
    Ok(Eigen { values: e.eigenvalues, vectors: e.eigenvectors })
}

pub fn max_eigenvalue(h: &DMatrix<f64>) -> Result<f64> {
    Ok(symmetric_eigen(h)?.max_value())
}

/// Lower Cholesky factor of a positive *semi*-definite matrix.
///
/// Columns whose pivot falls below `tol * max diag` are zeroed, so singular
/// covariances (including the zero matrix) factor without error.
pub fn psd_cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidArgument("Cholesky needs a square matrix".into()));
    }
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d < -1e-9 * scale.max(1.0) {
            return Err(Error::InvalidArgument(format!("matrix is not positive semidefinite (pivot {d:e})")));
        }
        if d <= tol {
            continue;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn cholesky_reconstructs() {
        let a = dmatrix![4.0, 2.0, 0.4; 2.0, 3.0, 0.1; 0.4, 0.1, 1.0];
        let l = psd_cholesky(&a).unwrap();
        assert!((&l * l.transpose() - &a).amax() < 1e-14);
    }

    #[test]
    fn cholesky_of_singular_and_zero() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(psd_cholesky(&z).unwrap(), z);
        let rank1 = dmatrix![1.0, 2.0; 2.0, 4.0];
        let l = psd_cholesky(&rank1).unwrap();
        assert!((&l * l.transpose() - &rank1).amax() < 1e-12);
        assert!(psd_cholesky(&dmatrix![1.0, 0.0; 0.0, -1.0]).is_err());
    }

    #[test]
    fn eigen_extremes() {
        let e = symmetric_eigen(&dmatrix![1.0, 0.0; 0.0, 3.0]).unwrap();
        assert!((e.max_value() - 3.0).abs() < 1e-14);
        assert!((e.min_value() - 1.0).abs() < 1e-14);
        assert!(symmetric_eigen(&dmatrix![f64::NAN]).is_err());
    }
}
