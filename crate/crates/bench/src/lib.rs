//! Benchmarking of the cobyqa solver on a built-in problem set, with
//! performance and data profiles written as CSV.

pub mod problems;
pub mod profiles;
pub mod suite;

pub use problems::{find, noisy_wrap, registry, TestProblem};
pub use profiles::{benchmark_merit, converged_at, data_profile, performance_profile, Outcomes, ProfileCurve};
pub use suite::{run_suite, solver_config, write_csv, RunRecord, SolverConfig, SuiteOptions, SuiteResult, SOLVER_IDS};
