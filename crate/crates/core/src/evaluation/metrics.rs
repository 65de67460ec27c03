//! Multi-label evaluation metrics over `m × c` matrices (samples × labels).
//!
//! Binary matrices hold `0.0`/`1.0`; anything above `0.5` counts as positive.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub hamming_loss: f64,
    pub ranking_loss: f64,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub average_precision: f64,
}

impl MetricReport {
    pub const NAMES: [&'static str; 5] = [
        "hamming_loss",
        "ranking_loss",
        "macro_f1",
        "micro_f1",
        "average_precision",
    ];

    pub fn evaluate(scores: &DMatrix<f64>, predictions: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<Self> {
        let (macro_f1, micro_f1) = macro_micro_f1(predictions, truth)?;
        Ok(Self {
            hamming_loss: hamming_loss(predictions, truth)?,
            ranking_loss: ranking_loss(scores, truth)?,
            macro_f1,
            micro_f1,
            average_precision: average_precision(scores, truth)?,
        })
    }

    /// Values in [`Self::NAMES`] order.
    pub fn values(&self) -> [f64; 5] {
        [
            self.hamming_loss,
            self.ranking_loss,
            self.macro_f1,
            self.micro_f1,
            self.average_precision,
        ]
    }

    pub fn from_values(v: [f64; 5]) -> Self {
        Self {
            hamming_loss: v[0],
            ranking_loss: v[1],
            macro_f1: v[2],
            micro_f1: v[3],
            average_precision: v[4],
        }
    }
}

fn check_shapes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "{}×{} vs {}×{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if a.is_empty() {
        return Err(Error::Shape("empty label matrix".into()));
    }
    Ok(())
}

#[inline]
fn positive(v: f64) -> bool {
    v > 0.5
}

/// Fraction of mismatched (sample, label) entries.
pub fn hamming_loss(pred: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    check_shapes(pred, truth)?;
    let mismatches = pred
        .iter()
        .zip(truth.iter())
        .filter(|(p, t)| positive(**p) != positive(**t))
        .count();
    Ok(mismatches as f64 / pred.len() as f64)
}

/// Mean over evaluable samples of the fraction of (positive, negative) label
/// pairs with `score(positive) ≤ score(negative)`; ties count as misorderings.
///
/// Samples whose labels are all positive or all negative are skipped.
pub fn ranking_loss(scores: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    check_shapes(scores, truth)?;
    let mut total = 0.0;
    let mut evaluated = 0usize;
    for i in 0..truth.nrows() {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for j in 0..truth.ncols() {
            if positive(truth[(i, j)]) {
                pos.push(scores[(i, j)]);
            } else {
                neg.push(scores[(i, j)]);
            }
        }
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        neg.sort_by(f64::total_cmp);
        // for each positive, count negatives scoring at least as high
        let bad: usize = pos
            .iter()
            .map(|&p| neg.len() - neg.partition_point(|&v| v < p))
            .sum();
        total += bad as f64 / (pos.len() * neg.len()) as f64;
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(Error::Undefined("ranking loss undefined".into()));
    }
    Ok(total / evaluated as f64)
}

/// Macro- and micro-averaged F1; a label with no predicted or true positives scores 0.
pub fn macro_micro_f1(pred: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<(f64, f64)> {
    check_shapes(pred, truth)?;
    let c = pred.ncols();
    let (mut tp_all, mut fp_all, mut fn_all) = (0usize, 0usize, 0usize);
    let mut macro_sum = 0.0;
    for j in 0..c {
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for i in 0..pred.nrows() {
            match (positive(pred[(i, j)]), positive(truth[(i, j)])) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        macro_sum += f1(tp, fp, fn_);
        tp_all += tp;
        fp_all += fp;
        fn_all += fn_;
    }
    Ok((macro_sum / c as f64, f1(tp_all, fp_all, fn_all)))
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Example-based average precision.
///
/// Each sample's labels are ranked by descending score (equal scores by
/// ascending label index); for every true label, precision is the share of
/// true labels among those ranked at or above it. Samples without a true
/// label are skipped.
pub fn average_precision(scores: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    check_shapes(scores, truth)?;
    let c = truth.ncols();
    let mut total = 0.0;
    let mut evaluated = 0usize;
    let mut order: Vec<usize> = Vec::with_capacity(c);
    for i in 0..truth.nrows() {
        let n_pos = (0..c).filter(|&j| positive(truth[(i, j)])).count();
        if n_pos == 0 {
            continue;
        }
        order.clear();
        order.extend(0..c);
        order.sort_by(|&a, &b| scores[(i, b)].total_cmp(&scores[(i, a)]).then(a.cmp(&b)));
        let mut hits = 0usize;
        let mut sum = 0.0;
        for (rank, &j) in order.iter().enumerate() {
            if positive(truth[(i, j)]) {
                hits += 1;
                sum += hits as f64 / (rank + 1) as f64;
            }
        }
        total += sum / n_pos as f64;
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(Error::Undefined(
            "average precision undefined: no sample has a positive label".into(),
        ));
    }
    Ok(total / evaluated as f64)
}
