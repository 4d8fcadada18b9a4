//! Non-learning comparators: the offline full-information oracle and
//! the online threshold baseline.

pub mod baseline;
pub mod oracle;

pub use baseline::{calibrate_threshold, run_random, run_threshold, ThresholdPolicy};
pub use oracle::{solve_offline, OracleSolution};
