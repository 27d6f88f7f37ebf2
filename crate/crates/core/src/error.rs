use std::path::PathBuf;

/// Errors reported by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller broke an operation's shape or value contract.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Invalid configuration (unknown body, bad mask, bad schedule, ...).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("connection to {endpoint} refused: {source}")]
    ConnectionRefused {
        endpoint: String,
        #[source]
        source: std::io::Error,
    },

    /// The remote peer sent something that does not follow the wire protocol.
    #[error("protocol violation: {0}")]
    Protocol(String),

    /// The remote environment reported a layout that disagrees with the local one.
    #[error("spec mismatch: {0}")]
    SpecMismatch(String),

    /// The remote environment answered with `{"ok": false}`.
    #[error("remote environment error: {0}")]
    Remote(String),

    /// No evaluation records fall inside the requested window.
    #[error("empty window: {0}")]
    EmptyWindow(String),

    #[error("output directory {0} already contains run artifacts (pass --force to overwrite)")]
    OutputExists(PathBuf),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("plotting failed: {0}")]
    Plot(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Fails with a contract violation unless `actual == expected`.
pub(crate) fn check_width(what: &str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::contract(format!(
            "{what}: expected width {expected}, got {actual}"
        )))
    }
}
