//! Run configurations, the scenario catalog, and the report writers behind
//! the `mclaw` command.

mod config;
mod run;
pub mod scenarios;

pub use config::{parse_config, ConfigErrors, ConfigIssue, Reference, RunConfig, CHECKS, DEFAULT_PERTURBATION};
pub use run::{
    build_solver, convergence_study, execute, initial_data, oracle_error, paired_run, prepare, run_scenario, write_artifacts, ConvergenceTable, PairedRun,
    RunOutcome, ORACLE_STEPS,
};

use crate::error::Error;

/// Process exit status for an error: 2 for configuration and usage
/// problems, 3 when the numerics fail.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Usage(_) | Error::Expression { .. } | Error::Io(_) => 2,
        Error::SolverAbort { .. } | Error::NotPositiveDefinite { .. } | Error::Oracle(_) => 3,
    }
}
