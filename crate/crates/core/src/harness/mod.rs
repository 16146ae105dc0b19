//! Multi-step runs with monitors attached, parameter sweeps, and the CSV,
//! JSON and snapshot files they produce.

pub mod config;
pub mod output;
mod run;
mod sweep;

pub use config::{GridSection, OutputSection, RunConfig, RunSection, StopRule};
pub use run::{a_priori, run, AdmissibleEntry, Row, RunReport, Termination, CSV_NAME, REPORT_NAME};
pub use sweep::{richardson_order, self_convergence_order, sweep, SweepEntry, SweepSummary};
