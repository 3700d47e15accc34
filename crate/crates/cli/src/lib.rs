//! Experiment driver: error tables, representer convergence studies, single
//! recoveries and offline bundle files.

pub mod config;
pub mod convergence;
pub mod format;
pub mod recover;
pub mod table;

pub use config::{ConfigError, DataSource, ExperimentConfig, ExperimentKind, FunctionalKind};
pub use convergence::{run_representer_convergence, ConvergenceReport};
pub use recover::{
    read_bundle_summary, run_single_recovery, write_bundle_from_config, RecoveryReport,
};
pub use table::{run_table, ErrorTable};

/// Runs `f` on a dedicated thread pool when a thread count is given.
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> anyhow::Result<T> {
    match threads {
        Some(k) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()?
            .install(f)),
        None => Ok(f()),
    }
}
