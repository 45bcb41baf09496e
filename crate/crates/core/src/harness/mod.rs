//! Monte Carlo experiments, configuration, statistics and reports.

pub mod config;
pub mod report;
pub mod run;
pub mod stats;

pub use config::{Experiment, MeasurementSpec, ModelSpec, OutputFormat, SimulationConfig, SnrConvention};
pub use report::{ErrorRateReport, Row, CSV_HEADER};
pub use run::{count_errors, monte_carlo, run, run_with_threads, sweep_figure3};
pub use stats::{compare, compare_bound, wilson_interval, Comparison};
