use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rule number {0} is outside 0..=255")]
    RuleOutOfRange(u32),

    #[error("symbol {symbol} at cell {cell} is outside the alphabet {alphabet:?}")]
    ForeignSymbol {
        symbol: u8,
        cell: usize,
        alphabet: &'static [u8],
    },

    #[error("global rule index {0} is outside 1..=531441")]
    MixedIndexOutOfRange(u64),

    #[error("rules {eps} and {eps_prime} both map the zero neighborhood to a live cell")]
    SharedTripletConflict { eps: u8, eps_prime: u8 },

    #[error("de Bruijn enumeration B({order},{alphabet}) exhausted after {available} sequences ({requested} requested)")]
    DeBruijnExhausted {
        alphabet: usize,
        order: usize,
        requested: usize,
        available: usize,
    },

    #[error("invalid width {width}: {reason}")]
    InvalidWidth { width: usize, reason: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("rule {0} has no class label")]
    UnlabeledRule(u8),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code for this error: 3 for I/O, 2 for everything data-related.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}
