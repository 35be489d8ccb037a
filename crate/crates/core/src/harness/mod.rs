//! Seeded multi-trial experiments: specs and presets, the parallel trial
//! runner, result summaries and CSV artifacts.

mod output;
mod run;
mod spec;

pub use output::{
    chart_rows, emit_policy_chart, write_summary, write_trial_log, ChartKey, ChartRow, Manifest,
    RunStatus,
};
pub use run::{run_experiment, run_trial, summarize, Experiment, ExperimentSummary, TrialResult};
pub use spec::{preset, resolve, trial_seed, EnvSource, ExperimentSpec, DEFAULT_TRIALS, PRESETS};
