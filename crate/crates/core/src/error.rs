use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates the mathematical precondition of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation would exceed its configured work budget.
    #[error("resource error: {what} needs {required} work units, budget is {budget}")]
    Resource {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    /// Malformed input text (matrix or point-set files).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    /// Returns `Ok(())` when `required <= budget`.
    pub(crate) fn check_budget(what: &'static str, required: u128, budget: u128) -> Result<()> {
        if required > budget {
            Err(Error::Resource {
                what,
                required,
                budget,
            })
        } else {
            Ok(())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
