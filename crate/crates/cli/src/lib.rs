//! Command implementations behind the `mcnn` binary.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_eval, cmd_fd, cmd_repro, cmd_train, EvalSource, ReproOutcome, TrainOutcome,
};
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] mcnn::Error),
    #[error("{0}")]
    Input(String),
    /// A core failure inside one named stage of a pipeline.
    #[error("{stage}: {source}")]
    Stage { stage: String, source: mcnn::Error },
}

impl CliError {
    /// 0 success, 2 configuration, 3 numerical failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) | CliError::Stage { source: e, .. } if e.is_numerical() => 3,
            CliError::Core(
                mcnn::Error::InvalidConfig(_)
                | mcnn::Error::InvalidLaw(_)
                | mcnn::Error::InvalidMaterial(_),
            ) => 2,
            _ => 1,
        }
    }
}
