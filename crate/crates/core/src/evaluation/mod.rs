//! ML-kNN classification and multi-label metrics for judging selected features.

mod metrics;
mod mlknn;
mod pipeline;

pub use self::metrics::{average_precision, hamming_loss, macro_micro_f1, ranking_loss, MetricReport};
pub use self::mlknn::{mlknn_fit, mlknn_predict, MlknnModel};
pub use self::pipeline::{
    default_proportions, evaluate_pipeline, mean_std, PipelineConfig, PipelineReport, ProportionSummary,
    RunOutcome,
};
