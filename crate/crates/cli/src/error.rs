use std::path::PathBuf;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("computation failed: {0}")]
    Compute(fraclab_core::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl From<fraclab_core::Error> for CliError {
    fn from(e: fraclab_core::Error) -> Self {
        use fraclab_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::IntegerGamma(_) | E::Parse(_) | E::GridMismatch(_) => {
                CliError::Invalid(e.to_string())
            }
            other => CliError::Compute(other),
        }
    }
}

impl CliError {
    /// 1 for a computation that ran and failed, 2 for anything rejected
    /// before or outside the computation.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            _ => 2,
        }
    }
}
