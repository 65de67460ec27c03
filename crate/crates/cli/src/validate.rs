//! Runs the solver once and checks its invariants at every iteration.
//!
//! The report printed on stdout has this shape:
//!
//! ```text
//! {
//!   "manifest": RunManifest,
//!   "passed": bool,
//!   "properties": [
//!     { "name": string, "status": "pass" | "fail",
//!       "value": number, "threshold": number, "detail": string }
//!   ]
//! }
//! ```
//!
//! `value` is the worst measurement over all iterations and passes when it
//! is at most `threshold`. Property names:
//!
//! | name | value |
//! |---|---|
//! | `objective_monotone` | largest relative increase of the objective trace |
//! | `q_orthonormal` | largest `‖QᵀQ − I‖_max` |
//! | `m_symmetric` | largest `|M_ij − M_ji|` |
//! | `m_nonnegative` | largest `−M_ij` (0 when all entries are nonnegative) |
//! | `m_zero_diagonal` | largest `|M_ii|` |
//! | `f_box` | largest distance of an `F` entry from `[0, 1]` |
//! | `f_labeled` | largest `|F_ij − Y_ij|` over labeled rows |
//! | `block_descent` | largest per-block surrogate increase, relative to `max(1, |before|)` |
//! | `graph_kkt` | `max|M_ij·∂J/∂M_ij|` after repeated graph updates at the final `F`, `Q` |

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sgmfs::data::{make_split, standardize};
use sgmfs::graph::{build_splits, kkt_residual, update_graph, GraphViolations};
use sgmfs::solver::{fit_with_observer, IterationRecord};
use sgmfs::subspace::orthonormality_error;

use crate::args::{check_fraction, ValidateArgs};
use crate::classify;
use crate::manifest::{RunManifest, SplitParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Property {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub manifest: RunManifest,
    pub passed: bool,
    pub properties: Vec<Property>,
}

/// Raised after the report is printed so that the process exits with 1.
#[derive(Debug)]
struct PropertiesFailed(Vec<String>);

impl std::fmt::Display for PropertiesFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "failed properties: {}", self.0.join(", "))
    }
}

impl std::error::Error for PropertiesFailed {}

const MONOTONE_SLACK: f64 = 1e-7;
const ORTHONORMAL_TOL: f64 = 1e-8;
const DESCENT_SLACK: f64 = 1e-9;
const KKT_TOL: f64 = 1e-6;
/// The residual costs as much as an update, so it is checked in batches.
const KKT_CHECK_EVERY: usize = 10;

/// Worst values seen so far, with the iteration where each occurred.
#[derive(Default)]
struct Worst {
    values: Vec<(f64, usize)>,
}

impl Worst {
    fn record(&mut self, slot: usize, value: f64, iteration: usize) {
        if self.values.len() <= slot {
            self.values.resize(slot + 1, (0.0, 0));
        }
        // NaN must register as a failure, so it always wins.
        if value.is_nan() || value > self.values[slot].0 {
            self.values[slot] = (value, iteration);
        }
    }
}

const SLOTS: [&str; 7] = [
    "q_orthonormal",
    "m_symmetric",
    "m_nonnegative",
    "m_zero_diagonal",
    "f_box",
    "f_labeled",
    "block_descent",
];

pub fn run(args: &ValidateArgs) -> anyhow::Result<()> {
    check_fraction("--labeled-fraction", args.labeled_fraction)?;
    let source = args.data.source();
    let config = args.solver.config();
    let mut manifest = RunManifest::new(
        "validate",
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
    let labels = ds.labels();

    let mut worst = Worst::default();
    for slot in 0..SLOTS.len() {
        worst.record(slot, 0.0, 0);
    }
    let break_symmetry = args.break_symmetry;
    let mut observe = |rec: &IterationRecord<'_>| {
        let s = rec.state;
        let it = s.iteration;
        worst.record(0, orthonormality_error(&s.q), it);

        let mut m = s.m.weights().clone();
        if break_symmetry && m.nrows() > 1 {
            m[(0, 1)] += 1.0;
        }
        let g = GraphViolations::of(&m);
        worst.record(1, g.max_asymmetry, it);
        worst.record(2, (-g.min_entry).max(0.0), it);
        worst.record(3, g.max_abs_diagonal, it);

        worst.record(4, box_violation(&s.f), it);
        let labeled = split
            .labeled_indices()
            .iter()
            .flat_map(|&i| (0..labels.ncols()).map(move |l| (i, l)))
            .map(|(i, l)| (s.f[(i, l)] - labels[(i, l)]).abs())
            .fold(0.0, f64::max);
        worst.record(5, labeled, it);

        for b in rec.blocks {
            let rise = (b.after - b.before) / b.before.abs().max(1.0);
            worst.record(6, rise, it);
        }
    };
    let (state, _) = manifest
        .timed("fit", || fit_with_observer(&ds, &split, &config, &mut observe))
        .map_err(classify)?;

    let mut properties = Vec::new();
    let (rise, at) = max_relative_rise(&state.objective_trace);
    properties.push(property(
        "objective_monotone",
        rise,
        MONOTONE_SLACK,
        format!(
            "{} iterations, converged: {}, worst step ending at iteration {at}",
            state.iteration, state.converged
        ),
    ));
    let thresholds = [ORTHONORMAL_TOL, 0.0, 0.0, 0.0, 0.0, 0.0, DESCENT_SLACK];
    for (slot, name) in SLOTS.iter().enumerate() {
        let (value, it) = worst.values[slot];
        let detail = if value > 0.0 || value.is_nan() {
            format!("worst at iteration {it}")
        } else {
            "no violation".to_string()
        };
        properties.push(property(name, value, thresholds[slot], detail));
    }

    let (kkt, steps) = manifest.timed("kkt", || -> anyhow::Result<(f64, usize)> {
        let splits = build_splits(&state.f, &state.q, config.gamma, config.beta).map_err(classify)?;
        let mut m = state.m.clone();
        let mut residual = kkt_residual(&m, &splits);
        let mut steps = 0;
        while !(residual <= KKT_TOL) && steps < args.kkt_iters {
            let batch = KKT_CHECK_EVERY.min(args.kkt_iters - steps);
            for _ in 0..batch {
                m = update_graph(&m, &splits);
            }
            steps += batch;
            residual = kkt_residual(&m, &splits);
        }
        Ok((residual, steps))
    })?;
    properties.push(property(
        "graph_kkt",
        kkt,
        KKT_TOL,
        format!("after {steps} extra graph updates (limit {})", args.kkt_iters),
    ));

    let failed: Vec<String> = properties
        .iter()
        .filter(|p| p.status == Status::Fail)
        .map(|p| p.name.clone())
        .collect();
    let report = Report {
        manifest,
        passed: failed.is_empty(),
        properties,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    if failed.is_empty() {
        Ok(())
    } else {
        Err(PropertiesFailed(failed).into())
    }
}

fn property(name: &str, value: f64, threshold: f64, detail: String) -> Property {
    Property {
        name: name.to_string(),
        status: if value <= threshold {
            Status::Pass
        } else {
            Status::Fail
        },
        value,
        threshold,
        detail,
    }
}

fn box_violation(f: &DMatrix<f64>) -> f64 {
    f.iter()
        .map(|&v| {
            if v.is_nan() {
                f64::NAN
            } else {
                (-v).max(v - 1.0).max(0.0)
            }
        })
        .fold(0.0, |a, v| {
            if v.is_nan() || a.is_nan() {
                f64::NAN
            } else {
                a.max(v)
            }
        })
}

/// Largest `(t[k+1] − t[k]) / max(1, |t[k]|)` and the index `k+1` where it occurs.
fn max_relative_rise(trace: &[f64]) -> (f64, usize) {
    let mut worst = (0.0, 0);
    for (k, w) in trace.windows(2).enumerate() {
        let rise = (w[1] - w[0]) / w[0].abs().max(1.0);
        if rise.is_nan() || rise > worst.0 {
            worst = (rise, k + 1);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rises_are_relative() {
        assert_eq!(max_relative_rise(&[10.0, 9.0, 8.0]).0, 0.0);
        let (rise, at) = max_relative_rise(&[10.0, 9.0, 9.9]);
        assert!((rise - 0.1).abs() < 1e-12 && at == 2);
        assert!((max_relative_rise(&[0.5, 0.7]).0 - 0.2).abs() < 1e-15);
        assert!(max_relative_rise(&[1.0, f64::NAN]).0.is_nan());
    }

    #[test]
    fn nan_fails_a_property() {
        assert_eq!(property("x", f64::NAN, 1.0, String::new()).status, Status::Fail);
        assert!(box_violation(&DMatrix::from_element(1, 1, f64::NAN)).is_nan());
        assert_eq!(
            box_violation(&DMatrix::from_row_slice(1, 3, &[-0.5, 0.2, 1.25])),
            0.5
        );
    }
}
