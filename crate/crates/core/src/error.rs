use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The CLI maps [`Error::Infeasible`] to exit code 2 and every other variant
/// to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("capacity exceeded: {what} is {actual}, cap is {cap}{hint}")]
    Capacity {
        what: &'static str,
        actual: usize,
        cap: usize,
        hint: &'static str,
    },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn capacity(what: &'static str, actual: usize, cap: usize) -> Self {
        Error::Capacity {
            what,
            actual,
            cap,
            hint: "",
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
