use thiserror::Error;

#[derive(Debug, Error)]
pub enum SmobError {
    #[error("serialization error: {0}")]
    Serial(String),

    #[error("frame error: {0}")]
    Frame(String),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Fhe(#[from] fhe::FheError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SmobError>;
