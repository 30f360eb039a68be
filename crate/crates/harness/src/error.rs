use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },
    #[error("{path}: file is empty")]
    EmptyFile { path: PathBuf },
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("config: {0}")]
    InvalidConfig(String),
    #[error("evaluation: {0}")]
    Evaluation(String),
    #[error(transparent)]
    Core(#[from] dcoreset_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
