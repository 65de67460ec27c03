use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sgmfs::data::{load_csv, load_mulan, Dataset};
use sgmfs::graph::{Bandwidth, GraphInit};
use sgmfs::solver::{CMatrixForm, SgmfsConfig, UpdateOrder};

use crate::{classify, usage};

#[derive(Debug, Parser)]
#[command(
    name = "sgmfs",
    version,
    about = "Semi-supervised multi-label feature selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit on one labeled split and write the feature ranking.
    Select(SelectArgs),
    /// Sweep labeled fractions and selection proportions, scoring with ML-kNN.
    Benchmark(BenchmarkArgs),
    /// Fit once and check the solver's invariants; prints a JSON report.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Mulan,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset file: CSV with label columns last, or a Mulan ARFF file.
    #[arg(long)]
    pub data: PathBuf,
    /// Input format; inferred from the extension when omitted (.arff means mulan).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Mulan label manifest; defaults to the data path with an .xml extension.
    #[arg(long)]
    pub labels_xml: Option<PathBuf>,
    /// Number of trailing label columns in a CSV file.
    #[arg(long)]
    pub label_count: Option<usize>,
}

/// Where a dataset came from, as recorded in manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSource {
    pub path: PathBuf,
    pub format: Format,
    pub labels_xml: Option<PathBuf>,
    pub label_count: Option<usize>,
}

impl DataArgs {
    pub fn source(&self) -> DataSource {
        let format = self.format.unwrap_or_else(|| {
            let arff = self
                .data
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("arff"));
            if arff {
                Format::Mulan
            } else {
                Format::Csv
            }
        });
        let labels_xml = match format {
            Format::Mulan => Some(
                self.labels_xml
                    .clone()
                    .unwrap_or_else(|| self.data.with_extension("xml")),
            ),
            Format::Csv => None,
        };
        DataSource {
            path: self.data.clone(),
            format,
            labels_xml,
            label_count: self.label_count,
        }
    }
}

impl DataSource {
    pub fn load(&self) -> anyhow::Result<Dataset> {
        let ds = match self.format {
            Format::Csv => {
                let count = self
                    .label_count
                    .ok_or_else(|| usage("--label-count is required for CSV data"))?;
                load_csv(&self.path, count).map_err(classify)?
            }
            Format::Mulan => {
                let xml: &Path = self.labels_xml.as_deref().expect("set for mulan");
                load_mulan(&self.path, xml)?
            }
        };
        log::info!(
            "loaded {}: {} samples, {} features, {} labels",
            self.path.display(),
            ds.n_samples(),
            ds.n_features(),
            ds.n_labels()
        );
        Ok(ds)
    }
}

fn parse_sigma(s: &str) -> Result<Bandwidth, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Bandwidth::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Bandwidth::Fixed(v)),
        _ => Err(format!("expected a positive number or \"auto\", got {s:?}")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Label subspace dimension (default: half the labels, rounded up).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub lsd: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    /// Relative objective change that counts as converged.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    /// Kernel bandwidth for the initial graph, or "auto" for the mean pairwise distance.
    #[arg(long, default_value = "auto", value_parser = parse_sigma)]
    pub sigma: Bandwidth,
    /// Start from a k-nearest-neighbour graph instead of the full kernel.
    #[arg(long)]
    pub knn: Option<usize>,
    /// Multiplicative graph updates per iteration.
    #[arg(long, default_value_t = 10)]
    pub graph_steps: usize,
    /// Use C = XᵀWWᵀX − β(M−I)ᵀ(M−I) without the α factor.
    #[arg(long)]
    pub legacy_c: bool,
    /// Update W with the previous Q and b with the previous W.
    #[arg(long)]
    pub literal_order: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    pub fn config(&self) -> SgmfsConfig {
        SgmfsConfig {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            lsd: self.lsd.map(|v| v as usize),
            max_iters: self.max_iters,
            tol: self.tol,
            seed: self.seed,
            sigma: self.sigma,
            graph_init: self.knn.map_or(GraphInit::Full, GraphInit::Knn),
            c_form: if self.legacy_c {
                CMatrixForm::Unscaled
            } else {
                CMatrixForm::AlphaScaled
            },
            update_order: if self.literal_order {
                UpdateOrder::Literal
            } else {
                UpdateOrder::Fresh
            },
            graph_steps: self.graph_steps,
            ..SgmfsConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Share of samples whose labels the solver sees.
    #[arg(long, default_value_t = 0.15)]
    pub labeled_fraction: f64,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the learned graph as a dense CSV to this path.
    #[arg(long)]
    pub dump_graph: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Labeled fraction used when --labeled-fractions is absent.
    #[arg(long, default_value_t = 0.15)]
    pub labeled_fraction: f64,
    /// Comma-separated labeled fractions to sweep.
    #[arg(long, value_delimiter = ',')]
    pub labeled_fractions: Option<Vec<f64>>,
    /// Selection proportions: a comma list or start:end:step.
    #[arg(long, default_value = "0.02:0.30:0.02")]
    pub proportions: String,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// Training samples per run (default: 70% of the data).
    #[arg(long)]
    pub train_size: Option<usize>,
    /// Test samples per run (default: the rest).
    #[arg(long)]
    pub test_size: Option<usize>,
    /// ML-kNN neighbour count.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// ML-kNN Laplace smoothing.
    #[arg(long, default_value_t = 1.0)]
    pub smoothing: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0.15)]
    pub labeled_fraction: f64,
    /// Graph updates allowed when driving the final graph to its KKT point.
    /// Convergence is slow near the fixed point; expect thousands on a few hundred samples.
    #[arg(long, default_value_t = 50_000)]
    pub kkt_iters: usize,
    /// Test hook: corrupt the observed graph so the symmetry check must fail.
    #[arg(long, hide = true)]
    pub break_symmetry: bool,
}

/// Parses `a,b,c` or `start:end:step` (inclusive, tolerant to rounding).
pub fn parse_proportions(text: &str) -> anyhow::Result<Vec<f64>> {
    let bad = |why: &str| usage(format!("--proportions {text:?}: {why}"));
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("expected numbers"))?;
        let [start, end, step] = parts[..] else {
            return Err(bad("expected start:end:step"));
        };
        if !(step > 0.0) || end < start {
            return Err(bad("need step > 0 and end >= start"));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((start + i as f64 * step) * 1e10).round() / 1e10)
            .collect()
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("expected numbers"))?
    };
    if values.is_empty() || values.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return Err(bad("every proportion must be in (0, 1]"));
    }
    Ok(values)
}

pub fn check_fraction(name: &str, v: f64) -> anyhow::Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(usage(format!("{name}: {v} is outside (0, 1]")))
    }
}
