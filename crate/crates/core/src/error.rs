use thiserror::Error;

/// Errors raised by the library and mapped to exit codes by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input.
    #[error("invalid argument `{key}`: {msg}")]
    Argument { key: String, msg: String },
    /// A mathematical hypothesis of the requested computation is violated.
    #[error("hypothesis violated: {constraint}")]
    Hypothesis { constraint: String },
    /// A requested size exceeds the configured budget.
    #[error("budget exceeded: {what} needs {size} > budget {limit}")]
    Budget { what: String, size: u128, limit: u128 },
    /// The measure of the cell is zero so no exponent exists.
    #[error("undefined exponent: measure of cell `{cell}` is zero")]
    UndefinedExponent { cell: String },
    #[error("internal error: {0}")]
    Internal(String),
    #[error("io error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn arg(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Argument { key: key.into(), msg: msg.into() }
    }

    pub fn hypothesis(constraint: impl Into<String>) -> Self {
        Error::Hypothesis { constraint: constraint.into() }
    }

    /// Fails with [`Error::Budget`] when `size > limit`.
    pub fn check_budget(what: &str, size: u128, limit: u128) -> Result<()> {
        if size > limit {
            Err(Error::Budget { what: what.to_string(), size, limit })
        } else {
            Ok(())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
