use thiserror::Error;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no valid rows in input")]
    EmptyInput,

    #[error("ambiguous timestamp format: {0}")]
    AmbiguousTimestampFormat(String),

    #[error("missing column `{0}` in header")]
    MissingColumn(String),

    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("degenerate denominator: before + after = 0")]
    DegenerateDenominator,

    #[error("empty window")]
    EmptyWindow,

    #[error("non-finite value at position {0}")]
    NonFiniteValue(usize),

    #[error("series too short for window sequences: need {needed} observations, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("insufficient baseline: need at least {needed} spectra, got {got}")]
    InsufficientBaseline { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
