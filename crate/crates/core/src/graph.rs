//! Sample-reconstruction graph `M`: Gaussian-kernel initialization and the
//! multiplicative update that drives it towards a sparse, symmetric,
//! nonnegative graph.
//!
//! With `A = FFᵀ + QQᵀ` and `B = A − (γ/2β)E` (`E` all-ones), the graph block
//! of the objective is, up to a constant and the factor `β`,
//!
//! ```text
//! J(M) = tr(M A Mᵀ − 2 B Mᵀ)
//! ```
//!
//! and one update step is
//!
//! ```text
//! M_ij ← M_ij · sqrt( ((MA⁻ + A⁻M)_ij + 2B⁺_ij) / ((MA⁺ + A⁺M)_ij + 2B⁻_ij) )
//! ```
//!
//! which never increases `J`, keeps `M` symmetric and maps zeros to zeros.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied to the update denominator.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Symmetric, nonnegative, zero-diagonal `n × n` weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    weights: DMatrix<f64>,
}

impl SparseGraph {
    /// Wraps a matrix after checking squareness, symmetry (1e-10), nonnegativity and the zero diagonal.
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::Shape(format!(
                "graph must be square, got {}×{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        let v = GraphViolations::of(&weights);
        if v.max_asymmetry > 1e-10 || v.min_entry < 0.0 || v.max_abs_diagonal != 0.0 {
            return Err(Error::InvalidInput(format!(
                "not a valid graph: asymmetry {:.3e}, min entry {:.3e}, max |diag| {:.3e}",
                v.max_asymmetry, v.min_entry, v.max_abs_diagonal
            )));
        }
        Ok(Self { weights })
    }

    pub(crate) fn new_unchecked(weights: DMatrix<f64>) -> Self {
        Self { weights }
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.weights
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    /// Number of strictly positive entries.
    pub fn nnz(&self) -> usize {
        self.weights.iter().filter(|&&v| v > 0.0).count()
    }

    /// `‖M‖₁`, the entry sum of a nonnegative matrix.
    pub fn l1_norm(&self) -> f64 {
        self.weights.iter().map(|v| v.abs()).sum()
    }
}

/// Worst-case constraint measurements of a candidate graph matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphViolations {
    pub max_asymmetry: f64,
    pub min_entry: f64,
    pub max_abs_diagonal: f64,
}

impl GraphViolations {
    pub fn of(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut max_asymmetry: f64 = 0.0;
        let mut min_entry = f64::INFINITY;
        let mut max_abs_diagonal: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let v = m[(i, j)];
                min_entry = min_entry.min(v);
                max_asymmetry = max_asymmetry.max((v - m[(j, i)]).abs());
            }
            max_abs_diagonal = max_abs_diagonal.max(m[(j, j)].abs());
        }
        if n == 0 {
            min_entry = 0.0;
        }
        Self {
            max_asymmetry,
            min_entry,
            max_abs_diagonal,
        }
    }
}

/// Gaussian kernel bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Fixed(f64),
    /// Mean pairwise Euclidean distance.
    Auto,
}

/// Which pairs receive an initial kernel weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphInit {
    /// Every off-diagonal pair.
    Full,
    /// Pairs where either sample is among the other's `k` nearest neighbours.
    /// Zeros stay zero under the update, so this fixes the support for good.
    Knn(usize),
}

/// Builds the initial graph `M_ij = exp(−‖x_i − x_j‖² / σ²)`, symmetrized, with zero diagonal.
pub fn init_graph(features: &DMatrix<f64>, sigma: Bandwidth, init: GraphInit) -> Result<SparseGraph> {
    let n = features.ncols();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "graph needs at least 2 samples, got {n}"
        )));
    }
    let sq = pairwise_sq_distances(features);
    let sigma = match sigma {
        Bandwidth::Fixed(s) if s > 0.0 && s.is_finite() => s,
        Bandwidth::Fixed(s) => return Err(Error::param("sigma", format!("{s} must be positive"))),
        Bandwidth::Auto => {
            let mut total = 0.0;
            for j in 0..n {
                for i in 0..j {
                    total += sq[(i, j)].sqrt();
                }
            }
            let mean = total / (n * (n - 1) / 2) as f64;
            if !(mean > 0.0) {
                return Err(Error::DegenerateBandwidth);
            }
            mean
        }
    };
    let s2 = sigma * sigma;

    let mut m = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { (-sq[(i, j)] / s2).exp() });
    if let GraphInit::Knn(k) = init {
        if k == 0 || k >= n {
            return Err(Error::param("knn", format!("k = {k} must be in 1..{n}")));
        }
        let mut keep = DMatrix::from_element(n, n, false);
        for i in 0..n {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| sq[(i, a)].total_cmp(&sq[(i, b)]).then(a.cmp(&b)));
            for &j in &others[..k] {
                keep[(i, j)] = true;
                keep[(j, i)] = true;
            }
        }
        m.zip_apply(&keep, |v, k| {
            if !k {
                *v = 0.0
            }
        });
    }
    Ok(SparseGraph::new_unchecked(symmetrize(m)))
}

pub(crate) fn pairwise_sq_distances(features: &DMatrix<f64>) -> DMatrix<f64> {
    let n = features.ncols();
    let norms: Vec<f64> = features.column_iter().map(|c| c.norm_squared()).collect();
    let gram = features.tr_mul(features);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (norms[i] + norms[j] - 2.0 * gram[(i, j)]).max(0.0)
        }
    })
}

/// `(M + Mᵀ)/2` with the diagonal forced to zero.
pub(crate) fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
        m[(j, j)] = 0.0;
    }
    m
}

/// Nonnegative split `A = A⁺ − A⁻`, `B = B⁺ − B⁻` used by the multiplicative update.
///
/// `A⁺ = B⁺ = FFᵀ + (QQᵀ)⁺`, `A⁻ = (QQᵀ)⁻`, `B⁻ = (QQᵀ)⁻ + (γ/2β)E`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub a_plus: DMatrix<f64>,
    pub a_minus: DMatrix<f64>,
    pub b_plus: DMatrix<f64>,
    pub b_minus: DMatrix<f64>,
}

impl SplitPair {
    /// `A = A⁺ − A⁻`.
    pub fn a(&self) -> DMatrix<f64> {
        &self.a_plus - &self.a_minus
    }

    /// `B = B⁺ − B⁻`.
    pub fn b(&self) -> DMatrix<f64> {
        &self.b_plus - &self.b_minus
    }
}

pub fn build_splits(f: &DMatrix<f64>, q: &DMatrix<f64>, gamma: f64, beta: f64) -> Result<SplitPair> {
    if !(beta > 0.0) {
        return Err(Error::param("beta", "beta must be positive for graph update"));
    }
    if f.nrows() != q.nrows() {
        return Err(Error::Shape(format!(
            "F has {} rows, Q has {}",
            f.nrows(),
            q.nrows()
        )));
    }
    let qqt = q * q.transpose();
    let qqt_plus = qqt.map(|v| (v.abs() + v) / 2.0);
    let qqt_minus = qqt.map(|v| (v.abs() - v) / 2.0);
    let a_plus = f * f.transpose() + qqt_plus;
    let shift = gamma / (2.0 * beta);
    let b_minus = qqt_minus.map(|v| v + shift);
    Ok(SplitPair {
        b_plus: a_plus.clone(),
        a_plus,
        a_minus: qqt_minus,
        b_minus,
    })
}

/// One multiplicative step, followed by re-symmetrization and a zeroed diagonal.
pub fn update_graph(m: &SparseGraph, splits: &SplitPair) -> SparseGraph {
    let w = &m.weights;
    let n = w.nrows();
    let ma_minus = w * &splits.a_minus;
    let ma_plus = w * &splits.a_plus;
    // M and A± are symmetric, so (A±M)_ij = (MA±)_ji.
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let mij = w[(i, j)];
            if mij == 0.0 || i == j {
                continue;
            }
            let num = ma_minus[(i, j)] + ma_minus[(j, i)] + 2.0 * splits.b_plus[(i, j)];
            let den =
                (ma_plus[(i, j)] + ma_plus[(j, i)] + 2.0 * splits.b_minus[(i, j)]).max(DENOMINATOR_FLOOR);
            let v = mij * (num.max(0.0) / den).sqrt();
            // Entries decaying toward zero would otherwise turn subnormal,
            // which slows every later product by orders of magnitude.
            out[(i, j)] = if v < f64::MIN_POSITIVE { 0.0 } else { v };
        }
    }
    SparseGraph::new_unchecked(symmetrize(out))
}

/// `J(M) = tr(M A Mᵀ − 2 B Mᵀ)`, the quantity the update provably does not increase.
pub fn surrogate_objective(m: &SparseGraph, splits: &SplitPair) -> f64 {
    let w = &m.weights;
    let a = splits.a();
    let b = splits.b();
    let mam = (w * &a).component_mul(w).sum();
    let bm = b.component_mul(w).sum();
    mam - 2.0 * bm
}

/// `β(‖MF − F‖²_F + ‖MQ − Q‖²_F) + γ‖M‖₁`.
pub fn graph_objective(m: &SparseGraph, f: &DMatrix<f64>, q: &DMatrix<f64>, gamma: f64, beta: f64) -> f64 {
    let w = &m.weights;
    let rf = w * f - f;
    let rq = w * q - q;
    beta * (rf.norm_squared() + rq.norm_squared()) + gamma * m.l1_norm()
}

/// `max_ij |M_ij · (MA + AM − 2B)_ij|`, zero at a KKT point.
pub fn kkt_residual(m: &SparseGraph, splits: &SplitPair) -> f64 {
    let w = &m.weights;
    let a = splits.a();
    let b = splits.b();
    let ma = w * &a;
    let n = w.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let grad = ma[(i, j)] + ma[(j, i)] - 2.0 * b[(i, j)];
            worst = worst.max((w[(i, j)] * grad).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_have_unit_weight() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let m = init_graph(&x, Bandwidth::Fixed(1.0), GraphInit::Full).unwrap();
        assert_eq!(m.weights()[(0, 1)], 1.0);
        assert_eq!(m.weights()[(0, 0)], 0.0);
    }

    #[test]
    fn unit_distance_weight() {
        let x = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let m = init_graph(&x, Bandwidth::Fixed(1.0), GraphInit::Full).unwrap();
        assert!((m.weights()[(0, 1)] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((m.weights()[(0, 1)] - 0.3679).abs() < 1e-4);
    }

    #[test]
    fn auto_bandwidth_degenerate() {
        let x = DMatrix::from_element(3, 4, 2.5);
        assert!(matches!(
            init_graph(&x, Bandwidth::Auto, GraphInit::Full),
            Err(Error::DegenerateBandwidth)
        ));
    }

    #[test]
    fn auto_bandwidth_is_mean_distance() {
        // distances 1, 2, 3 → σ = 2
        let x = DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 3.0]);
        let m = init_graph(&x, Bandwidth::Auto, GraphInit::Full).unwrap();
        assert!((m.weights()[(0, 2)] - (-9.0f64 / 4.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn knn_init_is_symmetric_with_zeros() {
        let x = DMatrix::from_row_slice(1, 5, &[0.0, 1.0, 2.0, 10.0, 11.0]);
        let m = init_graph(&x, Bandwidth::Fixed(3.0), GraphInit::Knn(1)).unwrap();
        let w = m.weights();
        assert!(w[(0, 1)] > 0.0 && w[(1, 0)] > 0.0);
        assert_eq!(w[(0, 4)], 0.0);
        assert!(SparseGraph::new(w.clone()).is_ok());
    }

    #[test]
    fn zero_inputs_give_all_ones_b_minus() {
        let f = DMatrix::zeros(3, 2);
        let q = DMatrix::zeros(3, 1);
        let s = build_splits(&f, &q, 2.0, 1.0).unwrap();
        assert_eq!(s.b_minus, DMatrix::from_element(3, 3, 1.0));
        assert_eq!(s.a_plus, DMatrix::zeros(3, 3));
        assert_eq!(s.a_minus, DMatrix::zeros(3, 3));
        assert_eq!(s.b_plus, DMatrix::zeros(3, 3));
    }

    #[test]
    fn nonnegative_qqt_has_empty_a_minus() {
        let f = DMatrix::from_element(3, 1, 0.5);
        let q = DMatrix::from_element(3, 1, 1.0 / 3f64.sqrt());
        let s = build_splits(&f, &q, 1.0, 1.0).unwrap();
        assert_eq!(s.a_minus, DMatrix::zeros(3, 3));
    }

    #[test]
    fn zero_beta_rejected() {
        let f = DMatrix::zeros(3, 2);
        let q = DMatrix::zeros(3, 1);
        let err = build_splits(&f, &q, 1.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("beta must be positive"), "{err}");
    }

    #[test]
    fn zero_entries_stay_zero() {
        let mut w = DMatrix::from_element(4, 4, 0.5);
        w.fill_diagonal(0.0);
        w[(0, 3)] = 0.0;
        w[(3, 0)] = 0.0;
        let m = SparseGraph::new(w).unwrap();
        let f = DMatrix::from_fn(4, 2, |i, j| ((i + j) % 2) as f64);
        let q = DMatrix::from_fn(4, 1, |i, _| if i < 2 { 0.5 } else { -0.5 }) * 2f64.sqrt();
        let s = build_splits(&f, &q, 1.0, 1.0).unwrap();
        let out = update_graph(&m, &s);
        assert_eq!(out.weights()[(0, 3)], 0.0);
        assert_eq!(out.weights()[(3, 0)], 0.0);
        assert_eq!(out.weights()[(2, 2)], 0.0);
    }

    #[test]
    fn objective_of_zero_graph_with_orthonormal_q() {
        let m = SparseGraph::new(DMatrix::zeros(4, 4)).unwrap();
        let f = DMatrix::zeros(4, 2);
        let mut q = DMatrix::zeros(4, 2);
        q[(0, 0)] = 1.0;
        q[(2, 1)] = 1.0;
        assert_eq!(graph_objective(&m, &f, &q, 1.0, 1.0), 2.0);
        assert_eq!(graph_objective(&m, &f, &DMatrix::zeros(4, 2), 1.0, 1.0), 0.0);
    }
}
