use std::time::Instant;

use serde::{Deserialize, Serialize};
use sgmfs::solver::SgmfsConfig;

use crate::args::DataSource;

/// Everything needed to reproduce a run, embedded in every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub data: DataSource,
    pub config: SgmfsConfig,
    pub split: SplitParams,
    /// Selection proportions (benchmark only).
    #[serde(default)]
    pub proportions: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
    /// Wall-clock seconds per phase. Left out of CSV headers so that those stay
    /// byte-identical between repeated runs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub timings: Vec<PhaseTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    pub labeled_fractions: Vec<f64>,
    pub train_size: Option<usize>,
    pub test_size: Option<usize>,
    /// ML-kNN settings (benchmark only).
    pub k: Option<usize>,
    pub smoothing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, data: DataSource, config: SgmfsConfig, split: SplitParams) -> Self {
        let seed = config.seed;
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            data,
            config,
            split,
            proportions: Vec::new(),
            runs: 1,
            seed,
            timings: Vec::new(),
        }
    }

    /// Runs `f`, recording its wall-clock time under `phase`.
    pub fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(PhaseTiming {
            phase: phase.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    /// The manifest without timings, as one line of JSON.
    pub fn stable_json(&self) -> String {
        let stable = Self {
            timings: Vec::new(),
            ..self.clone()
        };
        serde_json::to_string(&stable).expect("manifest serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::Format;

    fn sample() -> RunManifest {
        let mut m = RunManifest::new(
            "benchmark",
            DataSource {
                path: "data/yeast.arff".into(),
                format: Format::Mulan,
                labels_xml: Some("data/yeast.xml".into()),
                label_count: None,
            },
            SgmfsConfig {
                alpha: 0.1,
                tol: 1e-5,
                ..Default::default()
            },
            SplitParams {
                labeled_fractions: vec![0.15, 0.35],
                train_size: Some(1500),
                test_size: Some(500),
                k: Some(10),
                smoothing: Some(1.0),
            },
        );
        m.proportions = sgmfs::evaluation::default_proportions();
        m.runs = 10;
        m.timings.push(PhaseTiming {
            phase: "fit".into(),
            seconds: 0.1 + 0.2,
        });
        m
    }

    #[test]
    fn json_round_trip() {
        let m = sample();
        let back: RunManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn stable_form_drops_only_timings() {
        let m = sample();
        let back: RunManifest = serde_json::from_str(&m.stable_json()).unwrap();
        assert!(back.timings.is_empty());
        assert_eq!(
            RunManifest {
                timings: m.timings.clone(),
                ..back
            },
            m
        );
        assert!(!m.stable_json().contains('\n'));
    }
}
