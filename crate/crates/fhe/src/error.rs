use thiserror::Error;

/// Errors produced by ring arithmetic and scheme operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FheError {
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("unsupported parameters: {0}")]
    UnsupportedParameters(String),

    #[error("domain error: expected {expected} domain, got {got}")]
    Domain { expected: &'static str, got: &'static str },

    #[error("scheme mismatch: expected {expected}, got {got}")]
    SchemeMismatch { expected: &'static str, got: &'static str },

    #[error("level exhausted: {0}")]
    LevelExhausted(String),

    #[error("scale mismatch: {0}; rescale or mod-switch operands to align first")]
    ScaleMismatch(String),

    #[error("level mismatch: {0}; mod-switch the fresher operand down first")]
    LevelMismatch(String),

    #[error("encoding overflow: {0}")]
    EncodingOverflow(String),

    #[error("too many values: {given} given, at most {max} fit")]
    TooManyValues { given: usize, max: usize },

    #[error("encoding unsupported: {0}")]
    EncodingUnsupported(String),

    #[error("noise budget exhausted: decryption unreliable")]
    NoiseBudgetExhausted,

    #[error("invalid ciphertext: {0}")]
    InvalidCiphertext(String),
}

pub type Result<T> = std::result::Result<T, FheError>;
