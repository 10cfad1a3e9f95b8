use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid permutation: {0}")]
    InvalidPerm(String),

    #[error("{0}")]
    Domain(String),

    #[error("capacity exceeded: {what} exceeds the cap of {cap}")]
    Capacity { what: String, cap: usize },

    #[error("{origin}:{line}: {msg}")]
    Parse {
        origin: String,
        line: usize,
        msg: String,
    },

    #[error("degenerate statistic `{name}`: {msg}")]
    DegenerateStatistic { name: String, msg: String },

    #[error("{path}: {msg}")]
    Io { path: String, msg: String },

    #[error("statistic `{name}` produced a non-finite value")]
    NonFinite { name: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::Dimension { expected, got })
        }
    }

    /// Process exit code used by the command-line front end: 3 for capacity
    /// overruns, 2 for every other input problem.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity { .. } => 3,
            _ => 2,
        }
    }
}
