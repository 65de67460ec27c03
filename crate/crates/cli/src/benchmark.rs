use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sgmfs::evaluation::{evaluate_pipeline, MetricReport, PipelineConfig};

use crate::args::{check_fraction, parse_proportions, BenchmarkArgs};
use crate::classify;
use crate::manifest::{RunManifest, SplitParams};
use crate::output::{ensure_dir, num, write_csv, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// One (labeled fraction, proportion) cell of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub labeled_fraction: f64,
    pub proportion: f64,
    pub metrics: BTreeMap<String, MeanStd>,
}

/// Per labeled fraction: each metric averaged over proportions within a run,
/// then mean and std over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionSummary {
    pub labeled_fraction: f64,
    pub metrics: BTreeMap<String, MeanStd>,
    pub converged_runs: usize,
}

/// Contents of `results.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct Results {
    pub manifest: RunManifest,
    pub cells: Vec<Cell>,
    pub averaged: Vec<FractionSummary>,
}

const METRICS: [fn(&MetricReport) -> f64; 5] = [
    |r| r.hamming_loss,
    |r| r.ranking_loss,
    |r| r.macro_f1,
    |r| r.micro_f1,
    |r| r.average_precision,
];

pub fn run(args: &BenchmarkArgs) -> anyhow::Result<()> {
    let fractions = args
        .labeled_fractions
        .clone()
        .unwrap_or_else(|| vec![args.labeled_fraction]);
    for &f in &fractions {
        check_fraction("--labeled-fractions", f)?;
    }
    let proportions = parse_proportions(&args.proportions)?;
    let source = args.data.source();
    let config = args.solver.config();
    let mut manifest = RunManifest::new(
        "benchmark",
        source.clone(),
        config.clone(),
        SplitParams {
            labeled_fractions: fractions.clone(),
            train_size: args.train_size,
            test_size: args.test_size,
            k: Some(args.k),
            smoothing: Some(args.smoothing),
        },
    );
    manifest.proportions = proportions.clone();
    manifest.runs = args.runs;

    let ds = manifest.timed("load", || source.load())?;
    config.validate(ds.n_samples(), ds.n_labels()).map_err(classify)?;

    let mut cells = Vec::new();
    let mut averaged = Vec::new();
    for &fraction in &fractions {
        let pipeline = PipelineConfig {
            labeled_fraction: fraction,
            proportions: proportions.clone(),
            runs: args.runs,
            seed: config.seed,
            train_size: args.train_size,
            test_size: args.test_size,
            k: args.k,
            smoothing: args.smoothing,
            sgmfs: config.clone(),
        };
        let report = manifest
            .timed(&format!("sweep {fraction}"), || evaluate_pipeline(&ds, &pipeline))
            .map_err(classify)?;
        for s in &report.summaries {
            let (mean, std) = (s.mean.values(), s.std.values());
            let metrics = MetricReport::NAMES
                .iter()
                .enumerate()
                .map(|(k, name)| {
                    (
                        name.to_string(),
                        MeanStd {
                            mean: mean[k],
                            std: std[k],
                        },
                    )
                })
                .collect();
            cells.push(Cell {
                labeled_fraction: fraction,
                proportion: s.proportion,
                metrics,
            });
        }
        let metrics = MetricReport::NAMES
            .iter()
            .zip(METRICS)
            .map(|(name, f)| {
                let (mean, std) = report.proportion_averaged(f);
                (name.to_string(), MeanStd { mean, std })
            })
            .collect();
        averaged.push(FractionSummary {
            labeled_fraction: fraction,
            metrics,
            converged_runs: report.runs.iter().filter(|r| r.converged).count(),
        });
    }

    ensure_dir(&args.out)?;
    let header = ["labeled_fraction", "proportion", "metric", "mean", "std", "runs"].map(String::from);
    let rows = cells.iter().flat_map(|cell| {
        MetricReport::NAMES.iter().map(move |name| {
            let m = cell.metrics[*name];
            vec![
                num(cell.labeled_fraction),
                num(cell.proportion),
                name.to_string(),
                num(m.mean),
                num(m.std),
                args.runs.to_string(),
            ]
        })
    });
    write_csv(&args.out.join("results.csv"), &manifest, &header, rows)?;
    write_json(
        &args.out.join("results.json"),
        &Results {
            manifest,
            cells,
            averaged,
        },
    )?;
    Ok(())
}
