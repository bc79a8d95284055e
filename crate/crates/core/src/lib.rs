//! Double blind comparisons: two parties, each holding a differently
//! encrypted copy of a secret identifier, learn whether the identifiers are
//! equal without either learning the identifier.

pub mod authority;
pub mod bilinear;
pub mod error;
pub mod harness;
pub mod multikey;
pub mod participant;
mod text;

pub use authority::{EntityRegistry, IssuanceRequest, IssuanceResponse, Issuer};
pub use bilinear::{Backend, GroupElement, MockParams, Scalar, Side};
pub use error::{Error, Result};
pub use participant::{ComparisonQuery, IndexAttribute, ParticipantKey, RecordDatabase};
