//! Command implementations behind the `zigrips` binary, exposed as a
//! library so the pipeline can be tested without spawning processes.

pub mod commands;
pub mod plot;
pub mod synth;

pub use commands::{
    cmd_bench, cmd_compare, cmd_greedy, cmd_persist, cmd_plot, cmd_sparsify, BenchConfig, BenchRow,
    CompareCheck, CompareConfig, RunConfig,
};
