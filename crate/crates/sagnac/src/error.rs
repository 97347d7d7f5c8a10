use std::path::PathBuf;

use sagnac_core::analysis::AnalysisError;
use sagnac_core::instrument::InstrumentError;
use sagnac_core::oam::OamError;
use sagnac_core::signal::SignalError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Instrument(#[from] InstrumentError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Oam(#[from] OamError),
}

impl Error {
    /// 2 for problems with the invocation or configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Input { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn input(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Input {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
