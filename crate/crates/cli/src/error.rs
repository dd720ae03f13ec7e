use std::path::PathBuf;

use sift_core::classifier::ClassifierError;
use sift_core::context::ContextError;
use sift_core::evaluation::EvalError;
use sift_core::ingest::IngestError;
use sift_core::verifier::{BackendError, VerifyError};
use thiserror::Error;

/// Every error maps to exit status 2; runs that finish with unresolved
/// warnings report through their exit status instead.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}
