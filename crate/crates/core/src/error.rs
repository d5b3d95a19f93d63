use thiserror::Error;

/// Errors produced anywhere in the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("item sets differ: {0}")]
    ItemMismatch(String),

    #[error("duplicate item `{0}` in ranking")]
    DuplicateItem(String),

    #[error("unknown item `{0}`")]
    UnknownItem(String),

    #[error("preference cycle through `{0}`")]
    Cycle(String),

    #[error("{what} exceeds guard: {actual} > {limit}")]
    GuardExceeded {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("pattern union is not {expected}")]
    ClassificationMismatch { expected: &'static str },

    #[error("no exact backend for a non-bipartite conjunction over {items} items (oracle limit {limit})")]
    NoBackend { items: usize, limit: usize },

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("arity error: {0}")]
    Arity(String),

    #[error("query is not sessionwise: {0}")]
    NonSessionwise(String),

    #[error("unsupported query: {0}")]
    Unsupported(String),

    #[error("session `{session}`: {source}")]
    Session {
        session: String,
        #[source]
        source: Box<Error>,
    },

    #[error("load error: {0}")]
    Load(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Strips session wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Session { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_guard(&self) -> bool {
        matches!(self.root(), Error::GuardExceeded { .. } | Error::NoBackend { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
