//! File formats and batch orchestration around `micromaser-core`.

pub mod config;
pub mod experiment;

pub use config::ExperimentConfig;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] micromaser_core::Error),
    #[error("run {index}: {source}")]
    Run { index: usize, source: micromaser_core::Error },
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("{0}: {1}")]
    Csv(String, #[source] csv::Error),
}
