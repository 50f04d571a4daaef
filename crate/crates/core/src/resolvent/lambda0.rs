//! The undamped case: smallest singular value of the truncated homogeneous
//! operator on rows `m in [-M, M]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest truncation accepted by [`lambda0_min_singular`].
pub const MIN_TRUNCATION: usize = 50;

/// `sqrt(sigma + m omega) - 1`.
pub fn lambda0_diagonal(omega: f64, sigma: f64, m: i64) -> Result<Complex64> {
    let arg = sigma + m as f64 * omega;
    if arg == 0.0 {
        return Err(Error::ThresholdHit(m));
    }
    Ok(Complex64::new(arg, 0.0).sqrt() - 1.0)
}

/// Tridiagonal operator with diagonal [`lambda0_diagonal`] and off-diagonals 1/2.
pub fn lambda0_operator(omega: f64, sigma: f64, truncation: usize) -> Result<DMatrix<Complex64>> {
    let size = 2 * truncation + 1;
    let mut op = DMatrix::zeros(size, size);
    for i in 0..size {
        let m = i as i64 - truncation as i64;
        op[(i, i)] = lambda0_diagonal(omega, sigma, m)?;
        if i + 1 < size {
            op[(i, i + 1)] = Complex64::new(0.5, 0.0);
            op[(i + 1, i)] = Complex64::new(0.5, 0.0);
        }
    }
    Ok(op)
}

/// Minimum over `sigma_grid` of the smallest singular value.
pub fn lambda0_min_singular(omega: f64, sigma_grid: &[f64], truncation: usize) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!("omega must be > 0, got {omega}")));
    }
    if truncation < MIN_TRUNCATION {
        return Err(Error::InvalidParameter(format!(
            "truncation must be >= {MIN_TRUNCATION}, got {truncation}"
        )));
    }
    if sigma_grid.is_empty() {
        return Err(Error::DegenerateInput("empty sigma grid".into()));
    }
    let mut smallest = f64::INFINITY;
    for &sigma in sigma_grid {
        if !(sigma > 0.0 && sigma < omega) {
            return Err(Error::InvalidParameter(format!("sigma {sigma} outside (0, {omega})")));
        }
        let op = lambda0_operator(omega, sigma, truncation)?;
        let sv = op.singular_values();
        smallest = smallest.min(sv.min());
    }
    Ok(smallest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_example() {
        let d = lambda0_diagonal(3.0, 0.5, 5).unwrap();
        assert!((d.re - 2.93700).abs() < 1e-5);
        assert_eq!(d.im, 0.0);
        // below threshold the root is imaginary
        let d = lambda0_diagonal(3.0, 0.5, -1).unwrap();
        assert!((d - Complex64::new(-1.0, 2.5f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn threshold_is_reported() {
        assert_eq!(lambda0_operator(0.5, 1.0, 3).unwrap_err(), Error::ThresholdHit(-2));
    }

    #[test]
    fn smallest_singular_value_matches_gram_eigenvalues() {
        let op = lambda0_operator(3.0, 0.7, 12).unwrap();
        let gram = op.adjoint() * &op;
        let herm = nalgebra::linalg::SymmetricEigen::new(gram);
        let min_eig = herm.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let sv = op.singular_values().min();
        assert!((sv * sv - min_eig).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        assert!(lambda0_min_singular(3.0, &[0.5], 10).is_err());
        assert!(lambda0_min_singular(3.0, &[3.5], 60).is_err());
        assert!(lambda0_min_singular(0.0, &[0.5], 60).is_err());
    }
}
