use thiserror::Error;

/// Errors surfaced by fallible operations across the crate.
///
/// Pure-math functions whose contracts exclude failure (documented
/// preconditions) panic via `assert!` instead of returning these.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole encountered: {0}")]
    Pole(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("level {level} not present (config has {max} levels)")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("contour placement: {0}")]
    ContourPlacement(String),
    #[error("insufficient chains: need {need}, got {got}")]
    InsufficientChains { need: usize, got: usize },
    #[error("incomplete table: missing subset mask {0:#b}")]
    IncompleteTable(u64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
