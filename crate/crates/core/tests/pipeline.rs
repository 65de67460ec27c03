use sgmfs::evaluation::{evaluate_pipeline, MetricReport, PipelineConfig};
use sgmfs::solver::SgmfsConfig;
use sgmfs::synthetic::SyntheticSpec;

fn small_config() -> PipelineConfig {
    PipelineConfig {
        labeled_fraction: 0.3,
        proportions: vec![0.2, 0.5, 1.0],
        runs: 3,
        seed: 4,
        k: 5,
        sgmfs: SgmfsConfig {
            max_iters: 30,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn one_run_has_zero_spread() {
    let ds = SyntheticSpec::new(80, 12, 3, 1).generate();
    let config = PipelineConfig {
        runs: 1,
        proportions: vec![1.0],
        ..small_config()
    };
    let report = evaluate_pipeline(&ds, &config).unwrap();
    assert_eq!(report.summaries.len(), 1);
    assert_eq!(report.summaries[0].std, MetricReport::default());
    assert_eq!(report, evaluate_pipeline(&ds, &config).unwrap());
}

#[test]
fn summaries_aggregate_runs() {
    let ds = SyntheticSpec::new(90, 16, 4, 2).generate();
    let config = small_config();
    let report = evaluate_pipeline(&ds, &config).unwrap();
    assert_eq!(report.runs.len(), 3);
    for (p, summary) in report.summaries.iter().enumerate() {
        let ap: Vec<f64> = report
            .runs
            .iter()
            .map(|r| r.reports[p].average_precision)
            .collect();
        let mean = ap.iter().sum::<f64>() / 3.0;
        assert!((summary.mean.average_precision - mean).abs() < 1e-12);
        for v in summary.mean.values() {
            assert!((0.0..=1.0).contains(&v));
        }
    }
    let (mean, std) = report.proportion_averaged(|r| r.average_precision);
    let per_run: Vec<f64> = report
        .runs
        .iter()
        .map(|r| r.reports.iter().map(|m| m.average_precision).sum::<f64>() / 3.0)
        .collect();
    let m = per_run.iter().sum::<f64>() / 3.0;
    let s = (per_run.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 2.0).sqrt();
    assert!((mean - m).abs() < 1e-12 && (std - s).abs() < 1e-12);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let ds = SyntheticSpec::new(70, 10, 3, 3).generate();
    let config = small_config();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| evaluate_pipeline(&ds, &config).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn selected_features_beat_noise_features() {
    // signal lives in the first quarter of the features; keeping 25% selected
    // by SGMFS should score at least as well as chance would suggest
    let ds = SyntheticSpec::new(160, 32, 4, 6).generate();
    let config = PipelineConfig {
        proportions: vec![0.25],
        runs: 2,
        ..small_config()
    };
    let report = evaluate_pipeline(&ds, &config).unwrap();
    assert!(report.summaries[0].mean.average_precision > 0.6);
}

#[test]
fn invalid_protocols_are_rejected() {
    let ds = SyntheticSpec::new(30, 5, 2, 0).generate();
    for config in [
        PipelineConfig {
            runs: 0,
            ..small_config()
        },
        PipelineConfig {
            proportions: vec![],
            ..small_config()
        },
        PipelineConfig {
            proportions: vec![1.5],
            ..small_config()
        },
        PipelineConfig {
            train_size: Some(25),
            test_size: Some(10),
            ..small_config()
        },
        PipelineConfig {
            k: 40,
            ..small_config()
        },
    ] {
        assert!(evaluate_pipeline(&ds, &config).is_err());
    }
}
