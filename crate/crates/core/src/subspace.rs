//! Shared label subspace: the orthonormal sample embedding `Q` and the
//! projection `P` back to label space.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::linalg;

/// Entries at or below this magnitude are skipped when fixing eigenvector signs.
const SIGN_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceState {
    pub q: DMatrix<f64>,
    pub p: DMatrix<f64>,
}

impl SubspaceState {
    pub fn lsd(&self) -> usize {
        self.q.ncols()
    }
}

/// Default subspace dimension, `⌈c/2⌉`.
pub fn default_lsd(n_labels: usize) -> usize {
    n_labels.div_ceil(2).max(1)
}

/// `(M − I)ᵀ(M − I)`.
pub fn residual_gram(m: &SparseGraph) -> DMatrix<f64> {
    let n = m.n();
    let r = m.weights() - DMatrix::<f64>::identity(n, n);
    r.tr_mul(&r)
}

/// `C = α·XᵀWWᵀX − β(M − I)ᵀ(M − I)`, symmetrized.
///
/// Passing `alpha = 1` gives the unscaled form in which the first term carries no `α`.
pub fn build_c_matrix(
    x: &DMatrix<f64>,
    w: &DMatrix<f64>,
    m: &SparseGraph,
    alpha: f64,
    beta: f64,
) -> Result<DMatrix<f64>> {
    if x.nrows() != w.nrows() || x.ncols() != m.n() {
        return Err(Error::Shape(format!(
            "X is {}×{}, W is {}×{}, M is {}×{}",
            x.nrows(),
            x.ncols(),
            w.nrows(),
            w.ncols(),
            m.n(),
            m.n()
        )));
    }
    let xtw = x.tr_mul(w);
    Ok(c_from_parts(&xtw, &residual_gram(m), alpha, beta))
}

pub(crate) fn c_from_parts(xtw: &DMatrix<f64>, gram: &DMatrix<f64>, alpha: f64, beta: f64) -> DMatrix<f64> {
    let mut c = xtw * xtw.transpose() * alpha - gram * beta;
    let n = c.nrows();
    for j in 0..n {
        for i in 0..j {
            let avg = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = avg;
            c[(j, i)] = avg;
        }
    }
    c
}

/// Eigenvectors of the `lsd` largest eigenvalues of symmetric `C`, as columns.
///
/// Columns are ordered by eigenvalue descending (equal eigenvalues keep the
/// solver's ascending index order) and each column's first entry with
/// magnitude above 1e-10 is made positive.
pub fn update_q(c_matrix: &DMatrix<f64>, lsd: usize) -> Result<DMatrix<f64>> {
    let n = c_matrix.nrows();
    if !c_matrix.is_square() {
        return Err(Error::Shape("C must be square".into()));
    }
    if lsd == 0 || lsd > n {
        return Err(Error::param("lsd", format!("{lsd} must be in 1..={n}")));
    }
    let (values, vectors) = linalg::symmetric_eigen(c_matrix)
        .ok_or_else(|| Error::InvalidInput("eigendecomposition of C failed".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let mut q = DMatrix::zeros(n, lsd);
    for (col, &k) in order.iter().take(lsd).enumerate() {
        let v = vectors.column(k);
        let sign = v.iter().find(|e| e.abs() > SIGN_EPS).map_or(1.0, |e| e.signum());
        q.set_column(col, &(v * sign));
    }
    Ok(q)
}

/// `P = QᵀXᵀW`, the least-squares fit of `XᵀW ≈ QP` for orthonormal `Q`.
pub fn compute_p(q: &DMatrix<f64>, x: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if q.nrows() != x.ncols() || x.nrows() != w.nrows() {
        return Err(Error::Shape("Q, X, W shapes are inconsistent".into()));
    }
    Ok(q.tr_mul(&x.tr_mul(w)))
}

/// `‖QᵀQ − I‖_max`.
pub fn orthonormality_error(q: &DMatrix<f64>) -> f64 {
    let k = q.ncols();
    (q.tr_mul(q) - DMatrix::<f64>::identity(k, k)).amax()
}
