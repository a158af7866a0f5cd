use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operands come from different group models or quotient levels.
    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("{what} {index} out of range (0..{len})")]
    Range {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("{what} = {requested} exceeds cap {cap}")]
    Resource {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    /// Input outside the domain of an operation, e.g. a non-self-adjoint element.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }
}
