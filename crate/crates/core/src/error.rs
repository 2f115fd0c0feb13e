use std::path::PathBuf;

/// Errors returned by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument had the wrong length or shape.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    /// An argument was outside its valid domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A qubit index was out of range or a two-qubit gate referenced one qubit twice.
    #[error("invalid qubit index {index} for a {num_qubits}-qubit register")]
    Qubit { index: usize, num_qubits: usize },
    /// Ingestion failed on a specific row of a delimited file.
    #[error("{path}: row {row}: {message}")]
    Ingest {
        path: PathBuf,
        row: usize,
        message: String,
    },
    /// A configuration field was missing or invalid.
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}, batch {batch}: loss = {loss}")]
    Diverged { epoch: usize, batch: usize, loss: f64 },
    /// A checkpoint file could not be parsed.
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            actual,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn ensure_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::dim(context, expected, actual))
    }
}
