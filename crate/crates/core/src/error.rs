use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A structurally invalid parameter (n < 2, zero extent, mismatched dimension, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The payload does not fit into the space freed by a deletion.
    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("out of bounds: {0}")]
    Bounds(String),

    #[error("value {value} does not fit in {width} bits")]
    Range { value: u64, width: u32 },

    #[error("malformed structure: {0}")]
    Structure(String),

    /// Data handed to a decoder could not have been produced by the matching encoder.
    #[error("corrupt stream: {0}")]
    Corrupt(String),

    /// A codec primitive was called outside its domain, e.g. ξ on a valid array.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Only reachable when a diagnostic iteration cap was requested.
    #[error("iteration cap of {0} exceeded")]
    CapExceeded(u64),

    #[error("bad magic bytes, expected \"MDC1\"")]
    BadMagic,

    #[error("unsupported container version {0}")]
    BadVersion(u8),

    #[error("truncated container: {0}")]
    Truncated(String),

    #[error("block {index}: {source}")]
    Block {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by the bytes being decoded rather than by the caller's parameters.
    pub fn is_corrupt_input(&self) -> bool {
        match self {
            Error::Corrupt(_) | Error::BadMagic | Error::BadVersion(_) | Error::Truncated(_) => true,
            Error::Block { source, .. } => source.is_corrupt_input() || source.is_contract(),
            _ => false,
        }
    }

    fn is_contract(&self) -> bool {
        matches!(self, Error::Contract(_) | Error::Structure(_))
    }

    pub(crate) fn in_block(self, index: u64) -> Self {
        Error::Block {
            index,
            source: Box::new(self),
        }
    }
}
