//! Evaluation protocol: trajectory errors, per-demo reports, the activation
//! ablation and the time-only comparison.

mod eval;
mod experiments;
mod trajectory;

pub use eval::{
    config_hash, dataset_hash, evaluate_model, evaluate_model_with, DemoMetrics, EvalReport, RunMeta,
    SplitSummary,
};
pub use experiments::{
    default_removal_sets, removal_label, run_ablation, run_collapse_experiment, AblationResult,
    AblationRun, CollapseResult, ExperimentConfig, PLAIN_BASELINE,
};
pub use trajectory::{keypoint_errors, peak_index, trajectory_mse, KeypointErrors};
