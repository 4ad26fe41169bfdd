//! Benchmark scenarios, batch execution and CSV output.

mod batch;
mod output;
mod scenarios;

pub use batch::{
    default_workers, quantile, run_batch, run_batch_results, run_rng, summarize, BatchStats,
    BatchSummary, BatchTiming, WORKERS_ENV,
};
pub use output::{
    emit_csv, emit_run_trace, read_csv, write_csv, write_run_trace, SummaryRow, SUMMARY_HEADER,
    TRACE_HEADER,
};
pub use scenarios::{
    almost_all_means, network_means, uniform_matroid_means, Scenario, ScenarioKind, ScenarioSpec,
    UNIFORM_MATROID_DIMS,
};
