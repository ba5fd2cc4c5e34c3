//! Experiment orchestration: configuration, sweeps, fits and reports.

pub mod config;
pub mod fit;
pub mod report;
pub mod sweep;

pub use config::{workers_from_env, SweepConfig, WORKERS_ENV};
pub use fit::{fit_stability, FitReport, SlopeFit};
pub use report::{read_records_csv, render_report, write_records_csv};
pub use sweep::{run_sweep, StabilityRecord, SweepOutcome};
pub mod checks;
