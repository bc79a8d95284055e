//! The trusted authority: owns the entity registry and raises blinded bases
//! to an entity's secret identifier.
//!
//! The authority only ever sees `g^r` for a fresh `r`, never a participant's
//! generator or index, and keeps no record of issuances.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use rand::Rng;

use crate::bilinear::{Backend, GroupElement, Scalar, Side};
use crate::error::{Error, Result};
use crate::text;

/// Blinded bases sent by an enrolling participant, one per source side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssuanceRequest {
    pub label: String,
    pub base_a: GroupElement,
    pub base_b: GroupElement,
}

/// The bases raised to the entity's identifier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssuanceResponse {
    pub element_a: GroupElement,
    pub element_b: GroupElement,
}

/// Anything that can answer an issuance request. The registry is the real
/// implementation; the harness and tests wrap it.
pub trait Issuer {
    fn issue(&self, request: &IssuanceRequest) -> Result<IssuanceResponse>;
}

/// Confirmation of a registration. Deliberately does not expose the identifier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Registration {
    label: String,
    position: usize,
}

impl Registration {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn position(&self) -> usize {
        self.position
    }
}

#[derive(Clone, Debug)]
pub struct EntityRegistry {
    backend: Backend,
    entries: IndexMap<String, Scalar>,
    assigned: HashSet<Scalar>,
}

impl EntityRegistry {
    pub fn new(backend: Backend) -> Self {
        EntityRegistry {
            backend,
            entries: IndexMap::new(),
            assigned: HashSet::new(),
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.entries.contains_key(label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Assigns a fresh uniform identifier to `label`, resampling on collision
    /// with any identifier already in the registry.
    pub fn register<R: Rng + ?Sized>(&mut self, label: &str, rng: &mut R) -> Result<Registration> {
        text::check_field(label)?;
        if label.is_empty() {
            return Err(Error::InvalidText(label.to_owned()));
        }
        if self.entries.contains_key(label) {
            return Err(Error::DuplicateLabel(label.to_owned()));
        }
        if let Backend::Mock(params) = self.backend {
            if self.assigned.len() as u64 >= params.modulus() - 1 {
                return Err(Error::RegistryExhausted);
            }
        }
        let id = loop {
            let candidate = self.backend.random_scalar(rng);
            if !self.assigned.contains(&candidate) {
                break candidate;
            }
        };
        self.assigned.insert(id);
        self.entries.insert(label.to_owned(), id);
        Ok(Registration {
            label: label.to_owned(),
            position: self.entries.len() - 1,
        })
    }

    /// Privileged accessor for the identifier behind `label`. Only the
    /// authority itself and test oracles should call this.
    pub fn reveal_identifier(&self, label: &str) -> Option<Scalar> {
        self.entries.get(label).copied()
    }

    /// Raises each blinded base to the identifier registered for the label.
    pub fn issue_raised(&self, request: &IssuanceRequest) -> Result<IssuanceResponse> {
        let id = self
            .entries
            .get(&request.label)
            .ok_or_else(|| Error::UnregisteredEntity(request.label.clone()))?;
        let raise = |base: &GroupElement, side| {
            if base.side() != side {
                return Err(Error::SideMismatch {
                    op: "issue_raised",
                    expected: side,
                    found: base.side(),
                });
            }
            if base.is_identity() {
                return Err(Error::IdentityBase);
            }
            self.backend.raise(base, id)
        };
        Ok(IssuanceResponse {
            element_a: raise(&request.base_a, Side::SourceA)?,
            element_b: raise(&request.base_b, Side::SourceB)?,
        })
    }

    /// One `label<TAB>hex(N)` line per entity, preceded by the backend
    /// header when the backend is the mock.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.backend.is_mock() {
            out.push_str(&self.backend.header());
            out.push('\n');
        }
        for (label, id) in &self.entries {
            let hex = self
                .backend
                .encode_scalar(id)
                .expect("registry scalars match the backend");
            out.push_str(label);
            out.push('\t');
            out.push_str(&hex);
            out.push('\n');
        }
        out
    }

    pub fn from_text(input: &str) -> Result<Self> {
        let mut lines = input.lines().enumerate().peekable();
        let backend = match lines.peek() {
            Some((_, first)) if first.starts_with("mock p=") && !first.contains('\t') => {
                let backend = first.parse()?;
                lines.next();
                backend
            }
            _ => Backend::Production,
        };
        let mut registry = EntityRegistry::new(backend);
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.is_empty() {
                continue;
            }
            let (label, hex) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected label<TAB>identifier"))?;
            let id = backend
                .decode_scalar(hex)
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
            if registry.entries.contains_key(label) {
                return Err(Error::parse(line_no, format!("duplicate label {label:?}")));
            }
            if !registry.assigned.insert(id) {
                return Err(Error::parse(line_no, "identifier shared by two entities"));
            }
            registry.entries.insert(label.to_owned(), id);
        }
        Ok(registry)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

impl Issuer for EntityRegistry {
    fn issue(&self, request: &IssuanceRequest) -> Result<IssuanceResponse> {
        self.issue_raised(request)
    }
}

impl<T: Issuer + ?Sized> Issuer for &T {
    fn issue(&self, request: &IssuanceRequest) -> Result<IssuanceResponse> {
        (**self).issue(request)
    }
}
