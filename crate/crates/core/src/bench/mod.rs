//! Benchmark harness: dataset ingestion, calibration/evaluation splitting,
//! method runners, metrics, and result persistence.
//!
//! Results are an append-only JSONL of [`RunRecord`]s keyed by
//! `(instance_id, method)`, so interrupted runs resume by skipping existing
//! records. Records serialize canonically — wall-clock timings are excluded
//! and trace durations scrubbed — which makes replay-mode runs byte-identical.
//! A bounded worker pool solves instances concurrently while a single
//! ordered writer appends records in dataset order.

mod dataset;
mod records;
mod report;
mod runner;

pub use dataset::{load_dataset, load_instance, split_calibration, Dataset};
pub use records::{append_records, read_records, RecordIssues, RunRecord, SwitchInfo};
pub use report::{build_report, cost_report, CostReport, MethodCost, Report};
pub use runner::{
    build_switch_training, decisive_pairs, run_benchmark, BenchConfig, BenchMethod, SplitFilter,
    SwitchMode,
};
