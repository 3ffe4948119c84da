//! Experiment harness for `vsv-core`.
//!
//! Loads TOML experiment files, runs pricing sweeps and convergence studies
//! on a configurable worker pool and writes CSV reports. Every number in a
//! report is a function of the configuration and the seed alone; the
//! worker count only changes how fast it is produced.

pub mod config;
pub mod convergence;
pub mod error;
pub mod paths;
pub mod pricing;
pub mod report;
pub mod table;

pub use config::{load_config, ConfigError, ExperimentConfig, FieldError};
pub use convergence::{run_convergence_study, ConvergenceReport, SlopeFit};
pub use error::HarnessError;
pub use pricing::run_pricing;
pub use report::{emit_report, render_report, write_report, ReportRow};
pub use table::{reproduce_table, Table};

/// Runs `job` on a dedicated pool of `threads` workers, or on the global
/// pool when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match threads {
        None => Ok(job()),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(job)),
    }
}
