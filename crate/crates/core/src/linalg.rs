//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    match (m.nrows(), m.ncols()) {
        (0, _) | (_, 0) => 0.0,
        (1, _) | (_, 1) => m.norm(),
        (2, 2) => {
            // sigma_max^2 = (s + sqrt(s^2 - 4 det^2)) / 2 with s = ||M||_F^2
            let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            let s = a * a + b * b + c * c + d * d;
            let det = a * d - b * c;
            let disc = (s * s - 4.0 * det * det).max(0.0);
            ((s + disc.sqrt()) / 2.0).sqrt()
        }
        _ => m.clone().svd(false, false).singular_values.max(),
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(sym: &DMatrix<f64>) -> f64 {
    match sym.nrows() {
        0 => 0.0,
        1 => sym[(0, 0)],
        2 => {
            let (a, b, d) = (sym[(0, 0)], 0.5 * (sym[(0, 1)] + sym[(1, 0)]), sym[(1, 1)]);
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            mid - rad
        }
        _ => SymmetricEigen::new(sym.clone()).eigenvalues.min(),
    }
}

/// Inverse of a symmetric positive semidefinite matrix, or `None` when its
/// smallest eigenvalue is below `rel_tol * trace`.
pub fn guarded_inverse(gram: &DMatrix<f64>, rel_tol: f64) -> Option<DMatrix<f64>> {
    let trace = gram.trace();
    if !(trace > 0.0) || min_eigenvalue(gram) <= rel_tol * trace {
        return None;
    }
    gram.clone().try_inverse()
}

/// `y y^T` accumulated into `acc`.
pub fn add_outer(acc: &mut DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) {
    acc.ger(1.0, x, y, 1.0);
}
