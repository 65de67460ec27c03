use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sgmfs::data::{make_split, standardize};
use sgmfs::solver::{fit, FeatureRanking, SolverState};

use crate::args::{check_fraction, SelectArgs};
use crate::classify;
use crate::manifest::{RunManifest, SplitParams};
use crate::output::{ensure_dir, num, write_csv, write_json};

/// Contents of `trace.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct Trace {
    pub manifest: RunManifest,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn run(args: &SelectArgs) -> anyhow::Result<()> {
    check_fraction("--labeled-fraction", args.labeled_fraction)?;
    let source = args.data.source();
    let config = args.solver.config();
    let mut manifest = RunManifest::new(
        "select",
        source.clone(),
        config.clone(),
        SplitParams {
            labeled_fractions: vec![args.labeled_fraction],
            train_size: None,
            test_size: None,
            k: None,
            smoothing: None,
        },
    );

    let raw = manifest.timed("load", || source.load())?;
    config
        .validate(raw.n_samples(), raw.n_labels())
        .map_err(classify)?;
    let (ds, _) = standardize(&raw);
    let split = make_split(&ds, args.labeled_fraction, config.seed).map_err(classify)?;
    let (state, ranking) = manifest
        .timed("fit", || fit(&ds, &split, &config))
        .map_err(classify)?;
    if !state.converged {
        log::warn!("stopped after {} iterations without converging", state.iteration);
    }

    ensure_dir(&args.out)?;
    write_ranking(&args.out.join("ranking.csv"), &manifest, &ranking)?;
    write_weights(&args.out.join("weights.csv"), &manifest, &state.w)?;
    if let Some(path) = &args.dump_graph {
        write_graph(path, &manifest, &state)?;
    }
    write_json(
        &args.out.join("trace.json"),
        &Trace {
            manifest,
            objective_trace: state.objective_trace.clone(),
            iterations: state.iteration,
            converged: state.converged,
        },
    )?;
    Ok(())
}

fn write_ranking(path: &Path, manifest: &RunManifest, ranking: &FeatureRanking) -> anyhow::Result<()> {
    let header = ["feature_index", "score", "rank"].map(String::from);
    let rows = ranking
        .order
        .iter()
        .enumerate()
        .map(|(rank, &j)| vec![j.to_string(), num(ranking.scores[j]), (rank + 1).to_string()]);
    write_csv(path, manifest, &header, rows)
}

fn write_weights(path: &Path, manifest: &RunManifest, w: &DMatrix<f64>) -> anyhow::Result<()> {
    let mut header = vec!["feature_index".to_string()];
    header.extend((0..w.ncols()).map(|l| format!("label_{l}")));
    let rows = w.row_iter().enumerate().map(|(j, row)| {
        std::iter::once(j.to_string())
            .chain(row.iter().map(|&v| num(v)))
            .collect::<Vec<_>>()
    });
    write_csv(path, manifest, &header, rows)
}

fn write_graph(path: &Path, manifest: &RunManifest, state: &SolverState) -> anyhow::Result<()> {
    let m = state.m.weights();
    let header: Vec<String> = (0..m.ncols()).map(|j| format!("s{j}")).collect();
    let rows = m
        .row_iter()
        .map(|row| row.iter().map(|&v| num(v)).collect::<Vec<_>>());
    write_csv(path, manifest, &header, rows)
}
