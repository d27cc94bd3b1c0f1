use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("scenario entries {first} and {second} share {what} cell ({row}, {col})")]
    DuplicateEntry { first: usize, second: usize, what: &'static str, row: usize, col: usize },
    #[error("scenario entry {entry}: {message}")]
    BadEntry { entry: usize, message: String },
    #[error(transparent)]
    Instance(#[from] nrfmapf_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    /// Whether the error stems from user input rather than the solver.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Instance(nrfmapf_core::Error::Encoding(_) | nrfmapf_core::Error::Backend(_)))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
