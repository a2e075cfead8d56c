//! Dense vector/matrix aliases and the spectral quantities used to certify
//! map metadata.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

pub fn all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Smallest eigenvalue of the symmetric part (A + Aᵀ)/2.
pub fn min_symmetric_eigenvalue(a: &Matrix) -> f64 {
    let sym = (a + a.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Largest eigenvalue of the symmetric part (A + Aᵀ)/2.
pub fn max_symmetric_eigenvalue(a: &Matrix) -> f64 {
    let sym = (a + a.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.max()
}

/// Spectral norm ‖A‖₂ (largest singular value).
pub fn spectral_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

pub fn squared_distance(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Power iteration on AᵀA, kept independent of the SVD route above.
    fn power_spectral_norm(a: &Matrix) -> f64 {
        let ata = a.transpose() * a;
        let mut v = Vector::from_element(a.ncols(), 1.0).normalize();
        let mut est = 0.0;
        for _ in 0..20_000 {
            let w = &ata * &v;
            let next = w.norm();
            v = w / next;
            if (next - est).abs() <= 1e-15 * next {
                est = next;
                break;
            }
            est = next;
        }
        est.sqrt()
    }

    #[test]
    fn spectral_norm_matches_power_iteration() {
        let a = Matrix::from_row_slice(3, 2, &[1.0, 2.0, -0.5, 3.0, 0.25, -1.0]);
        assert!((spectral_norm(&a) - power_spectral_norm(&a)).abs() < 1e-9);
    }

    #[test]
    fn symmetric_part_ignores_skew_component() {
        // [[2, 5], [-5, 3]] has symmetric part diag(2, 3).
        let a = Matrix::from_row_slice(2, 2, &[2.0, 5.0, -5.0, 3.0]);
        assert!((min_symmetric_eigenvalue(&a) - 2.0).abs() < 1e-12);
        assert!((max_symmetric_eigenvalue(&a) - 3.0).abs() < 1e-12);
    }
}
