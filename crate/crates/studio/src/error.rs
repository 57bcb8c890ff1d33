use std::io;
use std::path::PathBuf;

pub type Result<T, E = StudioError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum StudioError {
    #[error(transparent)]
    Core(#[from] slider_core::Error),
    #[error("malformed PGM: {0}")]
    MalformedPgm(String),
    #[error("corrupt store: {0}")]
    CorruptStore(String),
    #[error("unsupported store format version {0}")]
    UnsupportedVersion(u64),
    #[error("unknown model: {0}")]
    UnknownModel(String),
    #[error("unknown slider: {0}")]
    UnknownSlider(String),
    #[error("slider id already taken: {0}")]
    DuplicateSlider(String),
    #[error("wrong model type: expected a {expected} model")]
    WrongModelType { expected: &'static str },
    #[error("I/O failure at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl StudioError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> StudioError {
        let path = path.into();
        move |source| StudioError::Io { path, source }
    }

    /// Stable error code shared by the CLI (stderr) and the HTTP API.
    pub fn code(&self) -> &'static str {
        match self {
            StudioError::Core(e) => e.code(),
            StudioError::MalformedPgm(_) => "MalformedPgm",
            StudioError::CorruptStore(_) => "CorruptStore",
            StudioError::UnsupportedVersion(_) => "UnsupportedVersion",
            StudioError::UnknownModel(_) => "UnknownModel",
            StudioError::UnknownSlider(_) => "UnknownSlider",
            StudioError::DuplicateSlider(_) => "DuplicateSlider",
            StudioError::WrongModelType { .. } => "WrongModelType",
            StudioError::Io { .. } => "IoFailure",
        }
    }

    /// Human-readable detail; for unknown words this is the word itself.
    pub fn detail(&self) -> String {
        match self {
            StudioError::Core(slider_core::Error::UnknownWord(w)) => w.clone(),
            other => other.to_string(),
        }
    }
}
