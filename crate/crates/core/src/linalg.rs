//! Dense factorizations backed by faer, exchanged through nalgebra matrices.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use nalgebra::DMatrix;

fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending; only the lower triangle is read.
pub(crate) fn symmetric_eigen(a: &DMatrix<f64>) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let evd = to_faer(a).self_adjoint_eigen(Side::Lower).ok()?;
    let s = evd.S().column_vector();
    let values = (0..s.nrows()).map(|i| s[i]).collect();
    Some((values, from_faer(evd.U())))
}

/// Solves `A X = B` for symmetric positive-definite `A` by Cholesky; `None` if `A` is not SPD.
pub(crate) fn spd_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let llt = to_faer(a).llt(Side::Lower).ok()?;
    let x = llt.solve(&to_faer(b));
    let x = from_faer(x.as_ref());
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Solves a general square system by partially pivoted LU; `None` on a non-finite result.
pub(crate) fn lu_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let lu = to_faer(a).partial_piv_lu();
    let x = lu.solve(&to_faer(b));
    let x = from_faer(x.as_ref());
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let (vals, _) = symmetric_eigen(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn spd_solve_rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(spd_solve(&a, &DMatrix::identity(2, 2)).is_none());
    }

    #[test]
    fn solves_match() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let b = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let x1 = spd_solve(&a, &b).unwrap();
        let x2 = lu_solve(&a, &b).unwrap();
        assert!((&a * &x1 - &b).amax() < 1e-14);
        assert!((x1 - x2).amax() < 1e-14);
    }
}
