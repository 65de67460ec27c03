//! Independent reference implementations used as test oracles.
//!
//! Everything here is written from the definitions with plain loops and
//! nalgebra's own eigen solver, sharing no code with the library beyond its
//! public types.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sgmfs::graph::SparseGraph;
use sgmfs::solver::SolverState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

pub fn binary(rng: &mut ChaCha8Rng, rows: usize, cols: usize, p: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = gaussian(rng, n, n);
    (&a + a.transpose()) * 0.5
}

/// A random symmetric nonnegative matrix with zero diagonal and positive off-diagonals.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> SparseGraph {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let v = 0.05 + rng.random::<f64>();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    SparseGraph::new(m).expect("valid graph")
}

/// Columns of a QR factor of a Gaussian matrix.
pub fn random_orthonormal(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DMatrix<f64> {
    let g = gaussian(rng, n, k);
    g.qr().q().columns(0, k).into_owned()
}

pub fn approx_rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

// ---------------------------------------------------------------- metrics

pub fn hamming_oracle(pred: &DMatrix<f64>, truth: &DMatrix<f64>) -> f64 {
    let mut wrong = 0.0;
    for i in 0..truth.nrows() {
        for j in 0..truth.ncols() {
            if (pred[(i, j)] > 0.5) != (truth[(i, j)] > 0.5) {
                wrong += 1.0;
            }
        }
    }
    wrong / (truth.nrows() * truth.ncols()) as f64
}

/// Pair enumeration; `None` when no sample has both a positive and a negative label.
pub fn ranking_loss_oracle(scores: &DMatrix<f64>, truth: &DMatrix<f64>) -> Option<f64> {
    let c = truth.ncols();
    let mut sum = 0.0;
    let mut samples = 0;
    for i in 0..truth.nrows() {
        let (mut pairs, mut bad) = (0usize, 0usize);
        for p in 0..c {
            for q in 0..c {
                if truth[(i, p)] > 0.5 && truth[(i, q)] <= 0.5 {
                    pairs += 1;
                    if scores[(i, p)] <= scores[(i, q)] {
                        bad += 1;
                    }
                }
            }
        }
        if pairs > 0 {
            sum += bad as f64 / pairs as f64;
            samples += 1;
        }
    }
    (samples > 0).then(|| sum / samples as f64)
}

/// Per-label confusion counts, then the two averages.
pub fn f1_oracle(pred: &DMatrix<f64>, truth: &DMatrix<f64>) -> (f64, f64) {
    let f1 = |tp: f64, fp: f64, fn_: f64| {
        if tp + fp + fn_ == 0.0 {
            0.0
        } else {
            let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
            if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            }
        }
    };
    let (mut tps, mut fps, mut fns, mut macro_sum) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..truth.ncols() {
        let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
        for i in 0..truth.nrows() {
            let (p, t) = (pred[(i, j)] > 0.5, truth[(i, j)] > 0.5);
            tp += (p && t) as u8 as f64;
            fp += (p && !t) as u8 as f64;
            fn_ += (!p && t) as u8 as f64;
        }
        macro_sum += f1(tp, fp, fn_);
        tps += tp;
        fps += fp;
        fns += fn_;
    }
    (macro_sum / truth.ncols() as f64, f1(tps, fps, fns))
}

/// rank(j) = 1 + #{labels scoring higher, or equal with a lower index}.
pub fn average_precision_oracle(scores: &DMatrix<f64>, truth: &DMatrix<f64>) -> Option<f64> {
    let c = truth.ncols();
    let rank = |i: usize, j: usize| {
        1 + (0..c)
            .filter(|&k| scores[(i, k)] > scores[(i, j)] || (scores[(i, k)] == scores[(i, j)] && k < j))
            .count()
    };
    let mut sum = 0.0;
    let mut samples = 0;
    for i in 0..truth.nrows() {
        let positives: Vec<usize> = (0..c).filter(|&j| truth[(i, j)] > 0.5).collect();
        if positives.is_empty() {
            continue;
        }
        let mut s = 0.0;
        for &j in &positives {
            let rj = rank(i, j);
            let above = positives.iter().filter(|&&k| rank(i, k) <= rj).count();
            s += above as f64 / rj as f64;
        }
        sum += s / positives.len() as f64;
        samples += 1;
    }
    (samples > 0).then(|| sum / samples as f64)
}

// ---------------------------------------------------------------- ML-kNN

/// Neighbours by full sort of (distance, index), excluding `skip`.
pub fn knn_oracle(train: &DMatrix<f64>, point: &DVector<f64>, k: usize, skip: Option<usize>) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = (0..train.ncols())
        .filter(|&j| Some(j) != skip)
        .map(|j| ((train.column(j) - point).norm_squared(), j))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Posterior `P(H₁ | E)` from the textbook ML-kNN formulas.
pub fn mlknn_oracle(
    train_x: &DMatrix<f64>,
    train_y: &DMatrix<f64>,
    test_x: &DMatrix<f64>,
    k: usize,
    s: f64,
) -> DMatrix<f64> {
    let n = train_x.ncols();
    let c = train_y.ncols();
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| knn_oracle(train_x, &train_x.column(i).into_owned(), k, Some(i)))
        .collect();
    let mut out = DMatrix::<f64>::zeros(test_x.ncols(), c);
    for l in 0..c {
        let positives = (0..n).filter(|&i| train_y[(i, l)] > 0.5).count() as f64;
        let prior = (s + positives) / (2.0 * s + n as f64);
        let mut hist1 = vec![0.0; k + 1];
        let mut hist0 = vec![0.0; k + 1];
        for i in 0..n {
            let cnt = neighbours[i].iter().filter(|&&j| train_y[(j, l)] > 0.5).count();
            if train_y[(i, l)] > 0.5 {
                hist1[cnt] += 1.0;
            } else {
                hist0[cnt] += 1.0;
            }
        }
        let t1: f64 = hist1.iter().sum();
        let t0: f64 = hist0.iter().sum();
        for t in 0..test_x.ncols() {
            let nb = knn_oracle(train_x, &test_x.column(t).into_owned(), k, None);
            let cnt = nb.iter().filter(|&&j| train_y[(j, l)] > 0.5).count();
            let p1 = prior * (s + hist1[cnt]) / (s * (k + 1) as f64 + t1);
            let p0 = (1.0 - prior) * (s + hist0[cnt]) / (s * (k + 1) as f64 + t0);
            out[(t, l)] = p1 / (p1 + p0);
        }
    }
    out
}

// ---------------------------------------------------------------- subspace

/// `C` by explicit summation over indices.
pub fn c_oracle(x: &DMatrix<f64>, w: &DMatrix<f64>, m: &DMatrix<f64>, alpha: f64, beta: f64) -> DMatrix<f64> {
    let (d, n) = x.shape();
    let c = w.ncols();
    let mut xtw = DMatrix::<f64>::zeros(n, c);
    for i in 0..n {
        for l in 0..c {
            for f in 0..d {
                xtw[(i, l)] += x[(f, i)] * w[(f, l)];
            }
        }
    }
    let r = |k: usize, i: usize| m[(k, i)] - if k == i { 1.0 } else { 0.0 };
    DMatrix::from_fn(n, n, |i, j| {
        let a: f64 = (0..c).map(|l| xtw[(i, l)] * xtw[(j, l)]).sum();
        let g: f64 = (0..n).map(|k| r(k, i) * r(k, j)).sum();
        alpha * a - beta * g
    })
}

/// Sum of the `k` largest eigenvalues via nalgebra's solver.
pub fn top_eigen_sum(c: &DMatrix<f64>, k: usize) -> f64 {
    let mut values: Vec<f64> = SymmetricEigen::new(c.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    values.iter().take(k).sum()
}

pub fn trace_form(q: &DMatrix<f64>, c: &DMatrix<f64>) -> f64 {
    (q.transpose() * c * q).trace()
}

// ---------------------------------------------------------------- solver

/// The materialized centering matrix.
pub fn centering(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64)
}

/// `(XHXᵀ + γD + αXXᵀ − αXQQᵀXᵀ, XHF)` with `H` built explicitly.
pub fn w_system(
    x: &DMatrix<f64>,
    f: &DMatrix<f64>,
    q: &DMatrix<f64>,
    d_vec: &DVector<f64>,
    alpha: f64,
    gamma: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let h = centering(x.ncols());
    let s = x * &h * x.transpose() + DMatrix::from_diagonal(&(d_vec * gamma)) + x * x.transpose() * alpha
        - x * q * q.transpose() * x.transpose() * alpha;
    (s, x * h * f)
}

/// Fit term `‖XᵀW + 1bᵀ − F‖²` by explicit loops.
pub fn fit_term(x: &DMatrix<f64>, w: &DMatrix<f64>, b: &DVector<f64>, f: &DMatrix<f64>) -> f64 {
    let (d, n) = x.shape();
    let mut total = 0.0;
    for i in 0..n {
        for l in 0..w.ncols() {
            let mut v = b[l] - f[(i, l)];
            for k in 0..d {
                v += x[(k, i)] * w[(k, l)];
            }
            total += v * v;
        }
    }
    total
}

/// Every objective term summed entry by entry.
pub fn objective_oracle(state: &SolverState, x: &DMatrix<f64>, alpha: f64, beta: f64, gamma: f64) -> f64 {
    let (d, n) = x.shape();
    let c = state.w.ncols();
    let lsd = state.q.ncols();
    let m = state.m.weights();
    let xtw = DMatrix::from_fn(n, c, |i, l| {
        (0..d).map(|k| x[(k, i)] * state.w[(k, l)]).sum::<f64>()
    });
    let p = DMatrix::from_fn(lsd, c, |a, l| {
        (0..n).map(|i| state.q[(i, a)] * xtw[(i, l)]).sum::<f64>()
    });

    let fit = fit_term(x, &state.w, &state.b, &state.f);
    let mut sub = 0.0;
    for i in 0..n {
        for l in 0..c {
            let qp: f64 = (0..lsd).map(|a| state.q[(i, a)] * p[(a, l)]).sum();
            sub += (xtw[(i, l)] - qp).powi(2);
        }
    }
    let residual = |mat: &DMatrix<f64>| {
        let mut t = 0.0;
        for i in 0..n {
            for l in 0..mat.ncols() {
                let mv: f64 = (0..n).map(|j| m[(i, j)] * mat[(j, l)]).sum();
                t += (mv - mat[(i, l)]).powi(2);
            }
        }
        t
    };
    let graph = residual(&state.f) + residual(&state.q);
    let l21: f64 = (0..d)
        .map(|k| (0..c).map(|l| state.w[(k, l)].powi(2)).sum::<f64>().sqrt())
        .sum();
    let l1: f64 = m.iter().map(|v| v.abs()).sum();
    fit + alpha * sub + beta * graph + gamma * (l21 + l1)
}

/// `β(‖MF − F‖² + ‖MQ − Q‖²) + γ‖M‖₁` by explicit loops.
pub fn graph_objective_oracle(
    m: &DMatrix<f64>,
    f: &DMatrix<f64>,
    q: &DMatrix<f64>,
    gamma: f64,
    beta: f64,
) -> f64 {
    let n = m.nrows();
    let mut total = 0.0;
    for mat in [f, q] {
        for i in 0..n {
            for l in 0..mat.ncols() {
                let mv: f64 = (0..n).map(|j| m[(i, j)] * mat[(j, l)]).sum();
                total += beta * (mv - mat[(i, l)]).powi(2);
            }
        }
    }
    total + gamma * m.iter().map(|v| v.abs()).sum::<f64>()
}
