//! Library half of the trace harness: the runner (replay, differential
//! checking, cost records) and the workload generators. The `mergeset`
//! binary is a thin command-line front end over these.

pub mod runner;
pub mod workload;

pub use runner::{
    run_trace, summarize, write_cost_csv, CheckMode, CostRecord, MergeCost, RunError, RunOptions,
    RunOutput, Summary, TraceEngine,
};
pub use workload::{gen_workload, WorkloadKind, WorkloadParams};
