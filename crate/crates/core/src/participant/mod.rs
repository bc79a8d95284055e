//! Database operators: enrollment through blinded issuance, query
//! construction as submitter, and comparison as responder.
//!
//! For a record enrolled under identifier `N` in slot `i`, the index is
//! `alpha_i = g^{s_i * N}` with `s_i` the per-record exponent. A query for
//! that record is `(g^{r * s_i}, alpha_i^r)` with a fresh `r`. The responder
//! holding `beta_j = h^{t_j * N'}` checks
//! `e(g^{r s_i}, beta_j) == e(alpha_i^r, h^{t_j})`, which holds iff `N = N'`.

mod database;
mod key;

use rand::Rng;

use crate::authority::{IssuanceRequest, IssuanceResponse, Issuer};
use crate::bilinear::{Backend, GroupElement, Scalar, Side};
use crate::error::{Error, Result};
use crate::text;

pub use database::{IndexAttribute, Record, RecordDatabase};
pub use key::{ParticipantKey, PRF_KEY_LEN};

/// A submitter's blinded request: `u1 = g^{r * s_i}`, `u2 = alpha_i^r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonQuery {
    pub id: String,
    pub u1: GroupElement,
    pub u2: GroupElement,
    pub predicate: String,
}

impl ComparisonQuery {
    /// Blinds an index held under `generator_a` with exponent
    /// `record_exponent`, using the explicit blinding scalar `r`.
    pub fn blind(
        backend: Backend,
        generator_a: &GroupElement,
        record_exponent: &Scalar,
        index_a: &GroupElement,
        r: &Scalar,
        id: String,
        predicate: String,
    ) -> Result<Self> {
        text::check_field(&predicate)?;
        let u1 = backend.raise(generator_a, &backend.scalar_mul(r, record_exponent)?)?;
        let u2 = backend.raise(index_a, r)?;
        Ok(ComparisonQuery { id, u1, u2, predicate })
    }
}

pub fn keygen<R: Rng + ?Sized>(backend: Backend, rng: &mut R) -> ParticipantKey {
    ParticipantKey::generate(backend, rng)
}

/// Fresh blinding scalar; `r = 1` would leave the blinded value unblinded.
pub fn blinding_scalar<R: Rng + ?Sized>(backend: Backend, rng: &mut R) -> Scalar {
    let one = backend.scalar(1).expect("one is a valid scalar");
    loop {
        let r = backend.random_scalar(rng);
        if r != one {
            return r;
        }
    }
}

/// Opaque 128-bit query token.
pub fn fresh_query_id<R: Rng + ?Sized>(rng: &mut R) -> String {
    let mut id = [0u8; 16];
    rng.fill_bytes(&mut id);
    hex::encode(id)
}

/// Enrollment state between sending the blinded bases and receiving the
/// authority's answer.
#[derive(Debug)]
pub struct PendingEnrollment {
    backend: Backend,
    slot: usize,
    unblind: Scalar,
}

impl PendingEnrollment {
    /// Sends `g^r` on both sides; remembers `s_i / r` for unblinding.
    pub fn begin(
        key: &ParticipantKey,
        slot: usize,
        label: &str,
        record_exponent: &Scalar,
        r: &Scalar,
    ) -> Result<(Self, IssuanceRequest)> {
        let b = key.backend();
        let request = IssuanceRequest {
            label: label.to_owned(),
            base_a: b.raise(key.generator_a(), r)?,
            base_b: b.raise(key.generator_b(), r)?,
        };
        let unblind = b.scalar_mul(record_exponent, &b.scalar_inverse(r)?)?;
        Ok((
            PendingEnrollment {
                backend: b,
                slot,
                unblind,
            },
            request,
        ))
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    /// `alpha_i = (g^{r N})^{s_i / r}` on each side.
    pub fn complete(self, response: &IssuanceResponse) -> Result<IndexAttribute> {
        let b = self.backend;
        for (element, side) in [
            (&response.element_a, Side::SourceA),
            (&response.element_b, Side::SourceB),
        ] {
            if element.side() != side {
                return Err(Error::SideMismatch {
                    op: "enroll",
                    expected: side,
                    found: element.side(),
                });
            }
            if element.is_identity() {
                return Err(Error::IssuanceCorrupt);
            }
        }
        Ok(IndexAttribute {
            slot: self.slot,
            a: b.raise(&response.element_a, &self.unblind)?,
            b: b.raise(&response.element_b, &self.unblind)?,
        })
    }
}

/// Enrolls `label` into the next free slot of `db` via the authority.
pub fn enroll_record<I: Issuer + ?Sized, R: Rng + ?Sized>(
    key: &ParticipantKey,
    db: &mut RecordDatabase,
    issuer: &I,
    label: &str,
    payload: &str,
    rng: &mut R,
) -> Result<IndexAttribute> {
    db.check_owner(key)?;
    text::check_field(payload)?;
    let slot = db.next_slot();
    let record_exponent = key.derive_record_exponent(slot);
    let r = blinding_scalar(key.backend(), rng);
    let (pending, request) = PendingEnrollment::begin(key, slot, label, &record_exponent, &r)?;
    let response = issuer.issue(&request)?;
    let index = pending.complete(&response)?;
    db.push(index.clone(), payload.to_owned())?;
    Ok(index)
}

/// Builds a freshly blinded query for the record in `slot`.
pub fn build_query<R: Rng + ?Sized>(
    key: &ParticipantKey,
    db: &RecordDatabase,
    slot: usize,
    predicate: &str,
    rng: &mut R,
) -> Result<ComparisonQuery> {
    db.check_owner(key)?;
    let row = db.row(slot)?;
    let r = blinding_scalar(key.backend(), rng);
    let id = fresh_query_id(rng);
    ComparisonQuery::blind(
        key.backend(),
        key.generator_a(),
        &key.derive_record_exponent(slot),
        &row.index.a,
        &r,
        id,
        predicate.to_owned(),
    )
}

/// `e(u1, index_b) == e(u2, responder_base)`, where `responder_base` is the
/// responder's `h^{t_j}` for the exponent under which `index_b` was enrolled.
pub fn compare_blinded(
    backend: Backend,
    query: &ComparisonQuery,
    index_b: &GroupElement,
    responder_base: &GroupElement,
) -> Result<bool> {
    let lhs = backend.pair(&query.u1, index_b)?;
    let rhs = backend.pair(&query.u2, responder_base)?;
    Ok(lhs == rhs)
}

/// True iff the query's hidden identifier equals the one behind `row`.
pub fn respond_compare(key: &ParticipantKey, row: &IndexAttribute, query: &ComparisonQuery) -> Result<bool> {
    let b = key.backend();
    let base = b.raise(key.generator_b(), &key.derive_record_exponent(row.slot))?;
    compare_blinded(b, query, &row.b, &base)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanOutcome {
    /// Lowest matching slot.
    pub slot: Option<usize>,
    /// More than one row matched the query.
    pub duplicate: bool,
}

/// Compares the query against every row in slot order.
pub fn scan_for_match(key: &ParticipantKey, db: &RecordDatabase, query: &ComparisonQuery) -> Result<ScanOutcome> {
    db.check_owner(key)?;
    let mut outcome = ScanOutcome {
        slot: None,
        duplicate: false,
    };
    for row in db.rows() {
        if respond_compare(key, &row.index, query)? {
            match outcome.slot {
                None => outcome.slot = Some(row.index.slot),
                Some(_) => outcome.duplicate = true,
            }
        }
    }
    Ok(outcome)
}
