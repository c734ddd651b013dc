//! Experiment orchestration: the policy-by-features factorial, the
//! rationality sweep, eta cross-validation, paired statistics and result
//! files.

mod error;
pub mod output;
pub mod record;
pub mod runner;
pub mod spec;
pub mod stats;
pub mod two_bump;

pub use error::{HarnessError, Result};
pub use record::{RunRecord, RESULTS_HEADER};
pub use runner::{run_episode, run_factorial, run_lambda_sweep, FactorialResult, SweepResult};
pub use spec::ExperimentSpec;
