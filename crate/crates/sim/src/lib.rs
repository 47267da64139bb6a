//! Simulation harness: two-group Fisher-test data sets, envelope curves
//! against the true discoveries, and Monte-Carlo coverage of the bounds.

pub mod config;
pub mod coverage;
pub mod envelopes;
pub mod error;
pub mod generate;
pub mod parallel;
pub mod runs;

pub use config::{Design, SimConfig, DEFAULT_METHODS};
pub use coverage::{coverage_mc, coverage_mc_in, monte_carlo_slack, violates, CoverageReport, CoverageRow};
pub use envelopes::{run_envelopes, MethodCurve};
pub use error::{SimError, SimResult};
pub use generate::{simulate, SimulatedData, Simulator};
pub use parallel::{thread_pool, THREADS_ENV};
pub use runs::{run_simulation, run_simulation_in, SimulationRuns};
