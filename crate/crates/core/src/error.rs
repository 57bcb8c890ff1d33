use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input is not valid UTF-8")]
    InvalidEncoding,
    #[error("no token reaches the minimum count")]
    EmptyVocabulary,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown word: {0}")]
    UnknownWord(String),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("pole centroids coincide; the axis is undefined")]
    DegenerateAxis,
}

impl Error {
    /// Stable error code, used on the wire and on stderr.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidEncoding => "InvalidEncoding",
            Error::EmptyVocabulary => "EmptyVocabulary",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::UnknownWord(_) => "UnknownWord",
            Error::ZeroVector => "ZeroVector",
            Error::InsufficientData(_) => "InsufficientData",
            Error::DegenerateAxis => "DegenerateAxis",
        }
    }

    pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
