use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: vector for `{word}` is all zeros")]
    ZeroVector { line: usize, word: String },

    #[error("unknown word `{0}`")]
    UnknownWord(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("entailment hierarchy contains a cycle through `{0}`")]
    Cycle(String),

    #[error("pair ({0}, {1}) appears in both the attract and repel sets")]
    Conflict(String, String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite gradient for `{word}` at coordinate {coord}: {value}")]
    NonFinite {
        word: String,
        coord: usize,
        value: f64,
    },

    /// Any of the above, tagged with the file it came from.
    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
