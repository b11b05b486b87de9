use std::path::PathBuf;

use rankfair_core::dataset::TemplateError;
use rankfair_core::report::ReportError;
use rankfair_core::{EmbedError, EvalError, MetricError, ModelError};

use crate::builder::BuildError;
use crate::provider::ProviderError;
use crate::testset_io::LoadError;

/// Process exit codes of the command line.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const PROVIDER: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Provider(ProviderError::Spec { .. }) => exit::USAGE,
            Error::Provider(_) | Error::Embed(_) => exit::PROVIDER,
            Error::Eval(EvalError::Embed { .. }) => exit::PROVIDER,
            Error::Build(e) if e.is_backend() => exit::PROVIDER,
            _ => exit::DATA,
        }
    }
}
