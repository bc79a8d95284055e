use std::io;

use thiserror::Error;

use crate::bilinear::Side;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: expected {expected} element, got {found}")]
    SideMismatch {
        op: &'static str,
        expected: Side,
        found: Side,
    },
    #[error("values from different backends cannot be combined")]
    BackendMismatch,
    #[error("scalar must be nonzero")]
    ZeroScalar,
    #[error("mock modulus {0} is not an odd prime below 2^63")]
    InvalidModulus(u64),
    #[error("invalid scalar: {0}")]
    InvalidScalar(String),
    #[error("invalid group element: {0}")]
    InvalidElement(String),
    #[error("dlog unavailable on the production backend")]
    DlogUnavailable,
    #[error("operation requires the mock backend")]
    MockOnly,

    #[error("entity {0:?} is already registered")]
    DuplicateLabel(String),
    #[error("unregistered entity {0:?}")]
    UnregisteredEntity(String),
    #[error("registry has no unassigned identifiers left")]
    RegistryExhausted,
    #[error("blinded base is the identity element")]
    IdentityBase,
    #[error("issuance corrupt: authority returned the identity element")]
    IssuanceCorrupt,
    #[error("text field {0:?} may not contain tabs or newlines")]
    InvalidText(String),

    #[error("database belongs to key {expected}, not {found}")]
    KeyMismatch { expected: String, found: String },
    #[error("unknown record slot {0}")]
    UnknownSlot(usize),
    #[error("expected {expected} dimensions, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid address bits {0:?}")]
    InvalidAddress(String),
    #[error("address {0} is already occupied")]
    AddressCollision(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("malformed message: {0}")]
    Message(String),
    #[error("step {step}: {cause}")]
    Step { step: usize, cause: Box<Error> },
    #[error("script: {0}")]
    Script(String),

    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
