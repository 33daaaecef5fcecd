use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{quantity} undefined at J = {value} (requires {requirement})")]
    Domain {
        quantity: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("constitutive law index must be 1, 2 or 3, got {0}")]
    InvalidLaw(usize),

    #[error("invalid one-hot encoding {0:?}")]
    InvalidEncoding([f64; 3]),

    #[error("invalid material properties: {0}")]
    InvalidMaterial(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: expected {expected} parameters, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("batch is empty")]
    EmptyBatch,

    #[error("non-finite loss at sample {sample}")]
    NonFiniteLoss { sample: usize },

    #[error("non-finite gradient entry at index {index}")]
    NonFiniteGradient { index: usize },

    #[error("training diverged at epoch {epoch}: {source}")]
    Diverged {
        epoch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("sample {sample}: {source}")]
    AtSample {
        sample: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("time step {dt:e} exceeds the explicit stability bound {bound:e}")]
    Unstable { dt: f64, bound: f64 },

    #[error("finite-difference solution left the admissible range at step {step}, node {node}: J = {value}")]
    FdBreakdown {
        step: usize,
        node: usize,
        value: f64,
    },

    #[error("query ({x_hat}, {t_hat}) lies outside the solution grid")]
    OutOfHull { x_hat: f64, t_hat: f64 },

    #[error("point sets differ: {0}")]
    Mismatch(String),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error("malformed CSV {path}: {reason}")]
    Csv { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by numerics (instability, divergence,
    /// leaving the physical range) rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Domain { .. }
            | Error::NonFiniteLoss { .. }
            | Error::NonFiniteGradient { .. }
            | Error::Diverged { .. }
            | Error::Unstable { .. }
            | Error::FdBreakdown { .. } => true,
            Error::AtSample { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
