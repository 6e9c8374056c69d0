use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The environment/learner pairing cannot be run (e.g. no uniform state sampler).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("enumeration refused: {branches} branches exceeds limit {limit}")]
    SizeGuard { branches: f64, limit: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The expert stopped answering (closed session or idle timeout).
    #[error("expert session closed")]
    SessionClosed,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
