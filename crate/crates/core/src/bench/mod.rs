//! Dataset-level evaluation: pairing prediction and label files, split
//! presets, mean±std aggregation, configuration ranking and reports.

mod aggregate;
mod eval;
mod rank;
mod report;
mod split;

pub use aggregate::{aggregate, aggregate_with, AggregateOptions, DegeneratePolicy, MetricAggregate, RANKED_METRICS};
pub use eval::{evaluate_run, load_mask, EvalOptions, EvalRecord, EvalRun, PairFailure};
pub use rank::{rank_configs, BenchReport, Rank};
pub use report::{emit_report, emitters, CsvEmitter, JsonEmitter, MarkdownEmitter, ReportEmitter, ReportFormat};
pub use split::{SplitPreset, SplitSpec};
