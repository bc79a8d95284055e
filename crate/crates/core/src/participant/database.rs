use std::fs;
use std::path::Path;

use crate::bilinear::{Backend, GroupElement, Side};
use crate::error::{Error, Result};
use crate::text;

use super::ParticipantKey;

/// A record's encrypted identifier `g^{s_i * N}`, held on both source sides
/// so its owner can act as submitter or responder.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexAttribute {
    pub slot: usize,
    pub a: GroupElement,
    pub b: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub index: IndexAttribute,
    pub payload: String,
}

/// Rows keyed by encrypted index only: no identifier, label, or secret is
/// ever stored here.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordDatabase {
    backend: Backend,
    owner: String,
    rows: Vec<Record>,
}

impl RecordDatabase {
    pub fn new(key: &ParticipantKey) -> Self {
        RecordDatabase {
            backend: key.backend(),
            owner: key.fingerprint(),
            rows: Vec::new(),
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn owner(&self) -> &str {
        &self.owner
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn next_slot(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Record] {
        &self.rows
    }

    pub fn row(&self, slot: usize) -> Result<&Record> {
        self.rows.get(slot).ok_or(Error::UnknownSlot(slot))
    }

    pub(crate) fn check_owner(&self, key: &ParticipantKey) -> Result<()> {
        let found = key.fingerprint();
        if found != self.owner {
            return Err(Error::KeyMismatch {
                expected: self.owner.clone(),
                found,
            });
        }
        Ok(())
    }

    pub(crate) fn push(&mut self, index: IndexAttribute, payload: String) -> Result<()> {
        text::check_field(&payload)?;
        if index.slot != self.rows.len() {
            return Err(Error::UnknownSlot(index.slot));
        }
        self.rows.push(Record { index, payload });
        Ok(())
    }

    /// Header (backend, owner fingerprint), then one
    /// `slot<TAB>A:<hex><TAB>B:<hex><TAB>payload` line per row.
    pub fn to_text(&self) -> String {
        let b = self.backend;
        let mut out = format!("{}\nowner\t{}\n", b.header(), self.owner);
        for row in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                row.index.slot,
                b.encode_element(&row.index.a)
                    .expect("stored elements match the backend"),
                b.encode_element(&row.index.b)
                    .expect("stored elements match the backend"),
                row.payload
            ));
        }
        out
    }

    pub fn from_text(input: &str) -> Result<Self> {
        let mut lines = input.lines();
        let backend: Backend = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty database file"))?
            .parse()
            .map_err(|e: Error| Error::parse(1, e.to_string()))?;
        let owner = text::keyed(lines.next().unwrap_or(""), "owner", 2)?.to_owned();
        let mut db = RecordDatabase {
            backend,
            owner,
            rows: Vec::new(),
        };
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 3;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.splitn(4, '\t').collect();
            let [slot, a, b, payload] = fields[..] else {
                return Err(Error::parse(line_no, "expected slot, two elements and a payload"));
            };
            let slot: usize = slot
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad slot {slot:?}")))?;
            if slot != db.rows.len() {
                return Err(Error::parse(line_no, format!("slot {slot} out of order")));
            }
            let at = |e: Error| Error::parse(line_no, e.to_string());
            let index = IndexAttribute {
                slot,
                a: backend.decode_element_on(Side::SourceA, a).map_err(at)?,
                b: backend.decode_element_on(Side::SourceB, b).map_err(at)?,
            };
            db.rows.push(Record {
                index,
                payload: payload.to_owned(),
            });
        }
        Ok(db)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}
