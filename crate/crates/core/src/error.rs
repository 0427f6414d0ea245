use thiserror::Error;

/// Every failure the workbench can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: String },

    #[error("{what} did not converge: tail estimate {tail:.3e} exceeds tolerance {tolerance:.3e}")]
    NonConvergence {
        what: &'static str,
        tail: f64,
        tolerance: f64,
    },

    #[error("overflow in {0}")]
    Overflow(&'static str),

    #[error("{a} is not invertible modulo {m}")]
    NotCoprime { a: i64, m: i64 },

    #[error("D1 = {d1} does not divide D2 = {d2}")]
    Divisibility { d1: u64, d2: u64 },

    #[error("{what} needs {needed} but the budget is {limit}")]
    Budget {
        what: &'static str,
        needed: u64,
        limit: u64,
    },

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("unsupported weight {0}: expected 12, 16 or 20")]
    UnsupportedWeight(u32),

    #[error("insufficient coefficients: need n up to {required}, table stops at {available}")]
    InsufficientCoefficients { required: u64, available: u64 },

    #[error("no Hecke eigenvalue supplied for the prime {0}")]
    MissingPrime(u64),

    #[error("parameter off the unitary axis: {0}")]
    OffAxis(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("no data: {0}")]
    NoData(String),

    #[error("corrupt cache at line {line}: {message}")]
    Corruption { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Validation { .. }
            | Error::InvalidInput(_)
            | Error::NotCoprime { .. }
            | Error::Divisibility { .. }
            | Error::UnsupportedWeight(_)
            | Error::OffAxis(_) => 2,
            Error::Pole { .. }
            | Error::NonConvergence { .. }
            | Error::Overflow(_)
            | Error::Consistency(_)
            | Error::Budget { .. } => 3,
            Error::InsufficientCoefficients { .. }
            | Error::MissingPrime(_)
            | Error::NoData(_)
            | Error::Corruption { .. }
            | Error::Io(_) => 4,
        }
    }

    pub(crate) fn pole(function: &'static str, at: impl std::fmt::Display) -> Self {
        Error::Pole {
            function,
            at: at.to_string(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
