use alloc::string::String;
use core::fmt;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Shapes do not line up (non-square matrix, wrong vector length, ...).
    Dimension(String),
    /// A scalar or matrix lies outside the domain an operation accepts.
    Domain(String),
    /// A coupling matrix does not have the structure a protocol requires.
    Structure(String),
    /// The operation does not apply to this protocol regime.
    Regime(String),
    /// The integrated state became non-finite.
    Divergence { time: f64 },
    /// Index outside the valid range.
    OutOfRange(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(m) => write!(f, "dimension error: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Structure(m) => write!(f, "structure error: {m}"),
            Error::Regime(m) => write!(f, "regime error: {m}"),
            Error::Divergence { time } => {
                write!(f, "state became non-finite at t = {time}")
            }
            Error::OutOfRange(m) => write!(f, "index out of range: {m}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
