use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operands live in different systems or have incompatible shapes.
    Mismatch(String),
    /// An argument is outside the operation's domain.
    Domain(String),
    /// The operation exists in the theory but not for this system.
    Unsupported(String),
    /// A numerical certificate failed; the message names the offending data.
    Certificate(String),
    /// Malformed serialized input.
    Parse(String),
    /// A result is no longer finite.
    Overflow(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Mismatch(m) => write!(f, "mismatch: {m}"),
            Error::Domain(m) => write!(f, "out of domain: {m}"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
            Error::Certificate(m) => write!(f, "certificate failed: {m}"),
            Error::Parse(m) => write!(f, "parse error: {m}"),
            Error::Overflow(m) => write!(f, "overflow: {m}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
