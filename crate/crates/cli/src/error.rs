use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Model(#[from] margin_bsde::Error),

    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// `2` for bad input, `3` for a numerical failure.
    pub fn exit_code(&self) -> u8 {
        use margin_bsde::Error as E;
        match self {
            CliError::Model(E::SingularMatrix { .. } | E::SingularCube { .. } | E::NoConvergence(_)) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
