//! Run configuration, orchestration, and reporting for the `abraham-qed`
//! command-line interface.
//!
//! Exit code convention shared with the binary: 0 when the run completes and
//! its verdict passes, 1 when it completes but the verdict fails, 2 for
//! configuration errors, 3 for numerical failures.

mod commands;
mod config;
mod output;
mod run;

pub use commands::{check_cutoff, diagnostics, rate_study, simulate_classical, simulate_quantum};
pub use config::{CutoffSpec, GridSpec, RunConfig};
pub use output::{fmt_f64, write_csv, write_json, SCHEMA_VERSION};
pub use run::{
    build_kernels, classical_initial, initial_alpha, run_classical, run_pair, run_sweep,
    sample_at, solver_config, PairedRun, PairedSample,
};
