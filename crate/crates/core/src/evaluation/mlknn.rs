//! Multi-label k-nearest-neighbour classifier (ML-kNN).
//!
//! For every label the model keeps a smoothed prior and, for each possible
//! count `j ∈ 0..=k` of positive neighbours, the likelihood of seeing `j`
//! under "label present" and "label absent". Prediction is the MAP decision.
//! Neighbours are Euclidean, ties go to the lower training index, and a
//! training sample is never its own neighbour.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MlknnModel {
    pub k: usize,
    pub smoothing: f64,
    /// Per label, `P(H₁)`.
    pub priors: Vec<f64>,
    /// Per label, `P(E_j | H₁)` for `j = 0..=k`.
    pub likelihood_present: Vec<Vec<f64>>,
    /// Per label, `P(E_j | H₀)` for `j = 0..=k`.
    pub likelihood_absent: Vec<Vec<f64>>,
    train_x: DMatrix<f64>,
    train_y: DMatrix<f64>,
}

fn sq_dist(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    a.column(i)
        .iter()
        .zip(b.column(j).iter())
        .map(|(u, v)| (u - v) * (u - v))
        .sum()
}

/// Indices of the `k` training columns nearest to `query`'s column `qi`.
fn nearest(
    train: &DMatrix<f64>,
    query: &DMatrix<f64>,
    qi: usize,
    k: usize,
    exclude: Option<usize>,
    scratch: &mut Vec<(f64, usize)>,
) -> Vec<usize> {
    scratch.clear();
    scratch.extend(
        (0..train.ncols())
            .filter(|&j| Some(j) != exclude)
            .map(|j| (sq_dist(query, qi, train, j), j)),
    );
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < scratch.len() {
        scratch.select_nth_unstable_by(k - 1, cmp);
        scratch.truncate(k);
    }
    scratch.sort_by(cmp);
    scratch.iter().map(|&(_, j)| j).collect()
}

/// Fits ML-kNN on `d × n` features and `n × c` binary labels.
pub fn mlknn_fit(
    train_x: &DMatrix<f64>,
    train_y: &DMatrix<f64>,
    k: usize,
    smoothing: f64,
) -> Result<MlknnModel> {
    let n = train_x.ncols();
    if train_y.nrows() != n {
        return Err(Error::Shape(format!(
            "{} label rows for {n} training samples",
            train_y.nrows()
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::param("k", format!("{k} must be in 1..{n}")));
    }
    if !(smoothing > 0.0) {
        return Err(Error::param("smoothing", format!("{smoothing} must be positive")));
    }
    let c = train_y.ncols();
    let priors = (0..c)
        .map(|l| {
            let count = train_y.column(l).iter().filter(|&&v| v > 0.5).count() as f64;
            (smoothing + count) / (2.0 * smoothing + n as f64)
        })
        .collect();

    let mut present = vec![vec![0usize; k + 1]; c];
    let mut absent = vec![vec![0usize; k + 1]; c];
    let mut scratch = Vec::with_capacity(n);
    for i in 0..n {
        let neighbours = nearest(train_x, train_x, i, k, Some(i), &mut scratch);
        for l in 0..c {
            let count = neighbours.iter().filter(|&&j| train_y[(j, l)] > 0.5).count();
            if train_y[(i, l)] > 0.5 {
                present[l][count] += 1;
            } else {
                absent[l][count] += 1;
            }
        }
    }
    let smooth = |hist: &[usize]| -> Vec<f64> {
        let total: usize = hist.iter().sum();
        let denom = smoothing * (k + 1) as f64 + total as f64;
        hist.iter().map(|&h| (smoothing + h as f64) / denom).collect()
    };
    Ok(MlknnModel {
        k,
        smoothing,
        priors,
        likelihood_present: present.iter().map(|h| smooth(h)).collect(),
        likelihood_absent: absent.iter().map(|h| smooth(h)).collect(),
        train_x: train_x.clone(),
        train_y: train_y.clone(),
    })
}

/// Posterior scores `P(H₁ | E)` and MAP predictions (ties predict 0) for `d × m` test features.
pub fn mlknn_predict(model: &MlknnModel, test_x: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if test_x.nrows() != model.train_x.nrows() {
        return Err(Error::Shape(format!(
            "test samples have {} features, model expects {}",
            test_x.nrows(),
            model.train_x.nrows()
        )));
    }
    let m = test_x.ncols();
    let c = model.priors.len();
    let mut scores = DMatrix::zeros(m, c);
    let mut predictions = DMatrix::zeros(m, c);
    let mut scratch = Vec::with_capacity(model.train_x.ncols());
    for i in 0..m {
        let neighbours = nearest(&model.train_x, test_x, i, model.k, None, &mut scratch);
        for l in 0..c {
            let count = neighbours
                .iter()
                .filter(|&&j| model.train_y[(j, l)] > 0.5)
                .count();
            let on = model.priors[l] * model.likelihood_present[l][count];
            let off = (1.0 - model.priors[l]) * model.likelihood_absent[l][count];
            scores[(i, l)] = on / (on + off);
            predictions[(i, l)] = if on > off { 1.0 } else { 0.0 };
        }
    }
    Ok((scores, predictions))
}
