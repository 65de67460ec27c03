//! Select features with SGMFS, classify with ML-kNN, score, repeat.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::MetricReport;
use super::mlknn::{mlknn_fit, mlknn_predict};
use crate::data::{make_split, Dataset, StandardizationStats};
use crate::error::{Error, Result};
use crate::solver::{self, select_features, SgmfsConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub labeled_fraction: f64,
    pub proportions: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
    /// Training samples per run; defaults to 70% of the dataset.
    pub train_size: Option<usize>,
    /// Test samples per run; defaults to everything not used for training.
    pub test_size: Option<usize>,
    pub k: usize,
    pub smoothing: f64,
    pub sgmfs: SgmfsConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            labeled_fraction: 0.15,
            proportions: default_proportions(),
            runs: 10,
            seed: 0,
            train_size: None,
            test_size: None,
            k: 10,
            smoothing: 1.0,
            sgmfs: SgmfsConfig::default(),
        }
    }
}

/// 0.02, 0.04, …, 0.30.
pub fn default_proportions() -> Vec<f64> {
    (1..=15)
        .map(|i| (i as f64 * 0.02 * 1e10).round() / 1e10)
        .collect()
}

/// Metrics of one run at one proportion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run: usize,
    pub iterations: usize,
    pub converged: bool,
    /// One report per configured proportion, in order.
    pub reports: Vec<MetricReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionSummary {
    pub proportion: f64,
    pub mean: MetricReport,
    pub std: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub summaries: Vec<ProportionSummary>,
    pub runs: Vec<RunOutcome>,
}

impl PipelineReport {
    /// Mean and standard deviation over runs of a metric first averaged over proportions.
    pub fn proportion_averaged(&self, metric: fn(&MetricReport) -> f64) -> (f64, f64) {
        let per_run: Vec<f64> = self
            .runs
            .iter()
            .map(|r| r.reports.iter().map(metric).sum::<f64>() / r.reports.len() as f64)
            .collect();
        mean_std(&per_run)
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn sizes(n: usize, config: &PipelineConfig) -> Result<(usize, usize)> {
    let train = config
        .train_size
        .unwrap_or_else(|| ((0.7 * n as f64).round() as usize).clamp(2, n.saturating_sub(1)));
    let test = config.test_size.unwrap_or(n.saturating_sub(train));
    if train < 2 || test == 0 || train + test > n {
        return Err(Error::param(
            "train_size",
            format!("train {train} + test {test} must fit in {n} samples with both non-empty"),
        ));
    }
    if config.k >= train {
        return Err(Error::param(
            "k",
            format!("{} must be below train size {train}", config.k),
        ));
    }
    Ok((train, test))
}

/// Runs the full protocol. Runs execute in parallel on the current rayon pool
/// and are collected in run order, so results do not depend on thread count.
pub fn evaluate_pipeline(dataset: &Dataset, config: &PipelineConfig) -> Result<PipelineReport> {
    if config.runs == 0 {
        return Err(Error::param("runs", "must be at least 1"));
    }
    if config.proportions.is_empty() || config.proportions.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::param("proportions", "each must be in (0, 1]"));
    }
    let (train_size, test_size) = sizes(dataset.n_samples(), config)?;

    let runs = (0..config.runs)
        .into_par_iter()
        .map(|run| run_once(dataset, config, run, train_size, test_size))
        .collect::<Result<Vec<_>>>()?;

    let summaries = config
        .proportions
        .iter()
        .enumerate()
        .map(|(p, &proportion)| {
            let mut mean = [0.0; 5];
            let mut std = [0.0; 5];
            for (k, (m, s)) in mean.iter_mut().zip(std.iter_mut()).enumerate() {
                let values: Vec<f64> = runs.iter().map(|r| r.reports[p].values()[k]).collect();
                (*m, *s) = mean_std(&values);
            }
            ProportionSummary {
                proportion,
                mean: MetricReport::from_values(mean),
                std: MetricReport::from_values(std),
            }
        })
        .collect();
    Ok(PipelineReport { summaries, runs })
}

fn run_once(
    dataset: &Dataset,
    config: &PipelineConfig,
    run: usize,
    train_size: usize,
    test_size: usize,
) -> Result<RunOutcome> {
    let seed = config.seed.wrapping_add(run as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..dataset.n_samples()).collect();
    order.shuffle(&mut rng);
    let mut train_idx = order[..train_size].to_vec();
    let mut test_idx = order[train_size..train_size + test_size].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let train = dataset.select_samples(&train_idx)?;
    let test = dataset.select_samples(&test_idx)?;
    let stats = StandardizationStats::fit(train.features());
    let train = Dataset::new(
        stats.apply(train.features())?,
        train.labels().clone(),
        train.feature_names().to_vec(),
        train.label_names().to_vec(),
    )?;
    let test_x = stats.apply(test.features())?;

    let split = make_split(&train, config.labeled_fraction, seed)?;
    let sgmfs = SgmfsConfig {
        seed,
        ..config.sgmfs.clone()
    };
    let (state, ranking) = solver::fit(&train, &split, &sgmfs)?;

    let reports = config
        .proportions
        .iter()
        .map(|&p| {
            let selected = select_features(&ranking, p)?;
            let tx = train.features().select_rows(&selected);
            let model = mlknn_fit(&tx, train.labels(), config.k, config.smoothing)?;
            let (scores, predictions) = mlknn_predict(&model, &test_x.select_rows(&selected))?;
            MetricReport::evaluate(&scores, &predictions, test.labels())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutcome {
        run,
        iterations: state.iteration,
        converged: state.converged,
        reports,
    })
}
