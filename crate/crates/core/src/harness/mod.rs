//! Experiment harness: CLI, grid/ablation runners, JSONL persistence, and
//! summaries.

mod cli;
mod record;
mod runner;
mod summary;

pub use cli::{
    ActorKind, AblationArgs, AnalyzeArgs, Cli, Command, GridArgs, GridSpec, ScalingArgs,
};
pub use record::{split_escalations, EscalationStep, TrialRecord, RECORD_SCHEMA};
pub use runner::{
    read_records, run_ablation, run_grid, write_trial_record, RunOutcome, ABLATION_CONFIGS,
};
pub use summary::{analysis_report, summarize, summary_csv, summary_table, Summary, SummaryRow};
