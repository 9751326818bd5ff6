use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] sctl_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Config problem with the offending field and, when known, its line.
    #[error("{}", config_message(.field, *.line, .message))]
    Config { field: String, line: Option<usize>, message: String },
    #[error("bad file format: {0}")]
    Format(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

fn config_message(field: &str, line: Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("config line {l}, field `{field}`: {message}"),
        None => format!("config field `{field}`: {message}"),
    }
}

pub type LabResult<T> = Result<T, LabError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
    let path = path.into();
    move |source| LabError::Io { path, source }
}
