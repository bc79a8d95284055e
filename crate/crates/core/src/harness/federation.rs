//! In-process participants sharing one authority, plus the plaintext
//! enrollment map the harness keeps as its oracle.

use std::collections::BTreeMap;

use rand::Rng;

use crate::authority::EntityRegistry;
use crate::bilinear::Backend;
use crate::error::{Error, Result};
use crate::participant::{self, IndexAttribute, ParticipantKey, RecordDatabase};

#[derive(Clone, Debug)]
pub struct Participant {
    pub key: ParticipantKey,
    pub db: RecordDatabase,
    /// Oracle only: the label enrolled at each slot.
    labels: Vec<String>,
}

impl Participant {
    pub fn oracle_label(&self, slot: usize) -> Option<&str> {
        self.labels.get(slot).map(String::as_str)
    }

    pub fn payloads(&self) -> impl Iterator<Item = &str> {
        self.db.rows().iter().map(|r| r.payload.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct Federation {
    registry: EntityRegistry,
    participants: BTreeMap<String, Participant>,
}

impl Federation {
    pub fn new(backend: Backend) -> Self {
        Federation {
            registry: EntityRegistry::new(backend),
            participants: BTreeMap::new(),
        }
    }

    pub fn backend(&self) -> Backend {
        self.registry.backend()
    }

    pub fn registry(&self) -> &EntityRegistry {
        &self.registry
    }

    pub fn register<R: Rng + ?Sized>(&mut self, label: &str, rng: &mut R) -> Result<()> {
        self.registry.register(label, rng).map(|_| ())
    }

    pub fn join<R: Rng + ?Sized>(&mut self, name: &str, rng: &mut R) -> Result<()> {
        if self.participants.contains_key(name) {
            return Err(Error::Script(format!("{name} already has a key")));
        }
        let key = participant::keygen(self.backend(), rng);
        let db = RecordDatabase::new(&key);
        self.participants.insert(
            name.to_owned(),
            Participant {
                key,
                db,
                labels: Vec::new(),
            },
        );
        Ok(())
    }

    pub fn participant(&self, name: &str) -> Result<&Participant> {
        self.participants
            .get(name)
            .ok_or_else(|| Error::Script(format!("{name} has no key")))
    }

    pub fn participants(&self) -> impl Iterator<Item = (&str, &Participant)> {
        self.participants.iter().map(|(n, p)| (n.as_str(), p))
    }

    /// Enrolls directly against the in-process registry; returns the slot.
    pub fn enroll<R: Rng + ?Sized>(&mut self, name: &str, label: &str, payload: &str, rng: &mut R) -> Result<usize> {
        let p = self
            .participants
            .get_mut(name)
            .ok_or_else(|| Error::Script(format!("{name} has no key")))?;
        let index = participant::enroll_record(&p.key, &mut p.db, &self.registry, label, payload, rng)?;
        p.labels.push(label.to_owned());
        Ok(index.slot)
    }

    /// Stores an index obtained through some other issuance path.
    pub(crate) fn record_enrollment(
        &mut self,
        name: &str,
        label: &str,
        index: IndexAttribute,
        payload: &str,
    ) -> Result<()> {
        let p = self
            .participants
            .get_mut(name)
            .ok_or_else(|| Error::Script(format!("{name} has no key")))?;
        p.db.push(index, payload.to_owned())?;
        p.labels.push(label.to_owned());
        Ok(())
    }

    /// `m[i][j]`: does a fresh query for the submitter's slot `i` match the
    /// responder's row `j`?
    pub fn match_matrix<R: Rng + ?Sized>(
        &self,
        submitter: &str,
        responder: &str,
        rng: &mut R,
    ) -> Result<Vec<Vec<bool>>> {
        let s = self.participant(submitter)?;
        let r = self.participant(responder)?;
        (0..s.db.len())
            .map(|i| {
                let query = participant::build_query(&s.key, &s.db, i, "match?", rng)?;
                r.db.rows()
                    .iter()
                    .map(|row| participant::respond_compare(&r.key, &row.index, &query))
                    .collect()
            })
            .collect()
    }

    /// Label equality over the same index pairs, from the plaintext map.
    pub fn ground_truth(&self, submitter: &str, responder: &str) -> Result<Vec<Vec<bool>>> {
        let s = self.participant(submitter)?;
        let r = self.participant(responder)?;
        Ok(s.labels
            .iter()
            .map(|a| r.labels.iter().map(|b| a == b).collect())
            .collect())
    }
}
