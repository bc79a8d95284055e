//! Experimental multi-key index: each record address is a `d`-bit string and
//! the record is identified by one key per bit position.
//!
//! For every dimension `k` the authority holds two routing entities
//! (`dim-k-bit-0`, `dim-k-bit-1`). A party enrolls both under its dimension
//! exponent `s_k`, so the record at address `b_1..b_d` is identified by
//! `alpha_{b_1,1}, .., alpha_{b_d,d}`. A responder resolves each dimension
//! with at most two comparisons and then looks the address up directly,
//! instead of scanning all `2^d` records.
//!
//! The responder learns the matched address.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::authority::{EntityRegistry, Issuer};
use crate::bilinear::{Backend, Scalar, Side};
use crate::error::{Error, Result};
use crate::participant::{
    blinding_scalar, compare_blinded, fresh_query_id, ComparisonQuery, IndexAttribute, ParticipantKey,
    PendingEnrollment,
};
use crate::text;

/// Record address; character `k` selects the bit for dimension `k + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address(Vec<u8>);

impl Address {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidAddress(format!("{bits:?}")));
        }
        Ok(Address(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All `2^d` addresses in ascending order.
    pub fn all(d: usize) -> impl Iterator<Item = Address> {
        (0..1usize << d).map(move |n| Address((0..d).map(|k| ((n >> (d - 1 - k)) & 1) as u8).collect()))
    }
}

impl FromStr for Address {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidAddress(s.to_owned())),
            })
            .collect::<Result<Vec<u8>>>()?;
        if bits.is_empty() {
            return Err(Error::InvalidAddress(s.to_owned()));
        }
        Ok(Address(bits))
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// The federation-wide routing entities: two registry labels per dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionSetup {
    labels: Vec<[String; 2]>,
}

impl DimensionSetup {
    pub fn dimensions(&self) -> usize {
        self.labels.len()
    }

    /// Label for `bit` of zero-based dimension `k`.
    pub fn label(&self, k: usize, bit: u8) -> &str {
        &self.labels[k][bit as usize]
    }

    /// `dims<TAB>d`, then `k<TAB>bit-0 label<TAB>bit-1 label` per dimension.
    pub fn to_text(&self) -> String {
        let mut out = format!("dims\t{}\n", self.dimensions());
        for (k, [l0, l1]) in self.labels.iter().enumerate() {
            out.push_str(&format!("{}\t{l0}\t{l1}\n", k + 1));
        }
        out
    }

    pub fn from_text(input: &str) -> Result<Self> {
        let mut lines = input.lines();
        let d: usize = text::keyed(lines.next().unwrap_or(""), "dims", 1)?
            .parse()
            .map_err(|_| Error::parse(1, "bad dimension count"))?;
        let mut labels = Vec::with_capacity(d);
        for k in 0..d {
            let line_no = k + 2;
            let line = lines.next().ok_or_else(|| Error::parse(line_no, "missing dimension"))?;
            let fields: Vec<&str> = line.split('\t').collect();
            let [idx, l0, l1] = fields[..] else {
                return Err(Error::parse(line_no, "expected k, bit-0 label, bit-1 label"));
            };
            if idx != (k + 1).to_string() {
                return Err(Error::parse(line_no, format!("dimension {idx} out of order")));
            }
            labels.push([l0.to_owned(), l1.to_owned()]);
        }
        Ok(DimensionSetup { labels })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

/// Registers `2d` routing entities `dim-k-bit-b` (k from 1). If any of them
/// already exists, the whole set gets the first free `.n` suffix.
pub fn setup_dimensions<R: Rng + ?Sized>(
    registry: &mut EntityRegistry,
    d: usize,
    rng: &mut R,
) -> Result<DimensionSetup> {
    if d == 0 {
        return Err(Error::InvalidAddress("zero dimensions".into()));
    }
    let labels_for = |suffix: Option<usize>| -> Vec<[String; 2]> {
        (1..=d)
            .map(|k| {
                [0, 1].map(|b| match suffix {
                    None => format!("dim-{k}-bit-{b}"),
                    Some(n) => format!("dim-{k}-bit-{b}.{n}"),
                })
            })
            .collect()
    };
    let labels = std::iter::once(None)
        .chain((2..).map(Some))
        .map(labels_for)
        .find(|ls| ls.iter().flatten().all(|l| !registry.contains(l)))
        .expect("some suffix is free");
    for label in labels.iter().flatten() {
        registry.register(label, rng)?;
    }
    Ok(DimensionSetup { labels })
}

/// A party's `2d` dimension keys `alpha_{b,k} = g^{s_k * N_{b,k}}`. The
/// `slot` of each [`IndexAttribute`] is its zero-based dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionKeys {
    keys: Vec<[IndexAttribute; 2]>,
}

impl DimensionKeys {
    pub fn dimensions(&self) -> usize {
        self.keys.len()
    }

    pub fn key(&self, k: usize, bit: u8) -> &IndexAttribute {
        &self.keys[k][bit as usize]
    }
}

/// Enrolls both bit entities of every dimension under the party's
/// dimension exponents.
pub fn enroll_dimension_keys<I: Issuer + ?Sized, R: Rng + ?Sized>(
    key: &ParticipantKey,
    setup: &DimensionSetup,
    issuer: &I,
    rng: &mut R,
) -> Result<DimensionKeys> {
    let mut keys = Vec::with_capacity(setup.dimensions());
    for k in 0..setup.dimensions() {
        let exponent = key.derive_dimension_exponent(k);
        let mut enroll = |bit: u8| -> Result<IndexAttribute> {
            let r = blinding_scalar(key.backend(), rng);
            let (pending, request) = PendingEnrollment::begin(key, k, setup.label(k, bit), &exponent, &r)?;
            pending.complete(&issuer.issue(&request)?)
        };
        keys.push([enroll(0)?, enroll(1)?]);
    }
    Ok(DimensionKeys { keys })
}

/// Per-record bundle: one dimension key per address bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiKeyIndex {
    pub address: Address,
    pub keys: Vec<IndexAttribute>,
}

pub fn enroll_multikey(dims: &DimensionKeys, address: &Address) -> Result<MultiKeyIndex> {
    check_dimensions(dims.dimensions(), address.len())?;
    let keys = address
        .bits()
        .iter()
        .enumerate()
        .map(|(k, &bit)| dims.key(k, bit).clone())
        .collect();
    Ok(MultiKeyIndex {
        address: address.clone(),
        keys,
    })
}

fn check_dimensions(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// One ordinary comparison query per dimension, each with its own blinding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiKeyQuery {
    pub id: String,
    pub parts: Vec<ComparisonQuery>,
}

pub fn build_multikey_query<R: Rng + ?Sized>(
    key: &ParticipantKey,
    dims: &DimensionKeys,
    address: &Address,
    predicate: &str,
    rng: &mut R,
) -> Result<MultiKeyQuery> {
    let blinds: Vec<Scalar> = (0..address.len())
        .map(|_| blinding_scalar(key.backend(), rng))
        .collect();
    let id = fresh_query_id(rng);
    build_multikey_query_with(key, dims, address, &blinds, id, predicate)
}

/// As [`build_multikey_query`] with explicit per-dimension blinding scalars.
pub fn build_multikey_query_with(
    key: &ParticipantKey,
    dims: &DimensionKeys,
    address: &Address,
    blinds: &[Scalar],
    id: String,
    predicate: &str,
) -> Result<MultiKeyQuery> {
    check_dimensions(dims.dimensions(), address.len())?;
    check_dimensions(address.len(), blinds.len())?;
    let parts = address
        .bits()
        .iter()
        .zip(blinds)
        .enumerate()
        .map(|(k, (&bit, r))| {
            ComparisonQuery::blind(
                key.backend(),
                key.generator_a(),
                &key.derive_dimension_exponent(k),
                &dims.key(k, bit).a,
                r,
                format!("{id}.{}", k + 1),
                predicate.to_owned(),
            )
        })
        .collect::<Result<_>>()?;
    Ok(MultiKeyQuery { id, parts })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiKeyRecord {
    pub index: MultiKeyIndex,
    pub payload: String,
}

/// A responder's multi-key database: its dimension keys plus records by
/// address. At most one record per address.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiKeyDatabase {
    backend: Backend,
    owner: String,
    dims: DimensionKeys,
    rows: BTreeMap<Address, MultiKeyRecord>,
}

impl MultiKeyDatabase {
    pub fn new(key: &ParticipantKey, dims: DimensionKeys) -> Self {
        MultiKeyDatabase {
            backend: key.backend(),
            owner: key.fingerprint(),
            dims,
            rows: BTreeMap::new(),
        }
    }

    pub fn dims(&self) -> &DimensionKeys {
        &self.dims
    }

    pub fn dimensions(&self) -> usize {
        self.dims.dimensions()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &MultiKeyRecord> {
        self.rows.values()
    }

    pub fn get(&self, address: &Address) -> Option<&MultiKeyRecord> {
        self.rows.get(address)
    }

    pub fn insert(&mut self, address: &Address, payload: &str) -> Result<&MultiKeyIndex> {
        text::check_field(payload)?;
        if self.rows.contains_key(address) {
            return Err(Error::AddressCollision(address.to_string()));
        }
        let index = enroll_multikey(&self.dims, address)?;
        let record = self.rows.entry(address.clone()).or_insert(MultiKeyRecord {
            index,
            payload: payload.to_owned(),
        });
        Ok(&record.index)
    }

    /// Header (backend, owner, `dims<TAB>d`, one `dim` line per dimension
    /// with the bit-0 and bit-1 key pairs), then one row per record:
    /// `address<TAB>` d side-tagged pairs `<TAB>payload`.
    pub fn to_text(&self) -> String {
        let b = self.backend;
        let enc = |x| b.encode_element(x).expect("stored elements match the backend");
        let mut out = format!("{}\nowner\t{}\ndims\t{}\n", b.header(), self.owner, self.dimensions());
        for k in 0..self.dimensions() {
            let (k0, k1) = (self.dims.key(k, 0), self.dims.key(k, 1));
            out.push_str(&format!(
                "dim\t{}\t{}\t{}\t{}\t{}\n",
                k + 1,
                enc(&k0.a),
                enc(&k0.b),
                enc(&k1.a),
                enc(&k1.b)
            ));
        }
        for (address, record) in &self.rows {
            out.push_str(&address.to_string());
            for key in &record.index.keys {
                out.push('\t');
                out.push_str(&enc(&key.a));
                out.push('\t');
                out.push_str(&enc(&key.b));
            }
            out.push('\t');
            out.push_str(&record.payload);
            out.push('\n');
        }
        out
    }

    pub fn from_text(input: &str) -> Result<Self> {
        let lines: Vec<&str> = input.lines().collect();
        let line = |i: usize| lines.get(i).copied().unwrap_or("");
        let backend: Backend = line(0).parse().map_err(|e: Error| Error::parse(1, e.to_string()))?;
        let owner = text::keyed(line(1), "owner", 2)?.to_owned();
        let d: usize = text::keyed(line(2), "dims", 3)?
            .parse()
            .map_err(|_| Error::parse(3, "bad dimension count"))?;
        let decode = |text: &str, side, line_no| {
            backend
                .decode_element_on(side, text)
                .map_err(|e| Error::parse(line_no, e.to_string()))
        };
        let mut keys = Vec::with_capacity(d);
        for k in 0..d {
            let line_no = k + 4;
            let fields: Vec<&str> = text::keyed(line(k + 3), "dim", line_no)?.split('\t').collect();
            let [idx, a0, b0, a1, b1] = fields[..] else {
                return Err(Error::parse(line_no, "expected dimension and two key pairs"));
            };
            if idx != (k + 1).to_string() {
                return Err(Error::parse(line_no, format!("dimension {idx} out of order")));
            }
            let attr = |a, b| -> Result<IndexAttribute> {
                Ok(IndexAttribute {
                    slot: k,
                    a: decode(a, Side::SourceA, line_no)?,
                    b: decode(b, Side::SourceB, line_no)?,
                })
            };
            keys.push([attr(a0, b0)?, attr(a1, b1)?]);
        }
        let mut db = MultiKeyDatabase {
            backend,
            owner,
            dims: DimensionKeys { keys },
            rows: BTreeMap::new(),
        };
        for (i, row) in lines.iter().enumerate().skip(d + 3) {
            let line_no = i + 1;
            if row.is_empty() {
                continue;
            }
            let fields: Vec<&str> = row.splitn(2 * d + 2, '\t').collect();
            if fields.len() != 2 * d + 2 {
                return Err(Error::parse(
                    line_no,
                    format!("expected address, {d} key pairs and a payload"),
                ));
            }
            let address: Address = fields[0]
                .parse()
                .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
            let payload = fields[2 * d + 1];
            let index = db
                .insert(&address, payload)
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
            for (k, key) in index.keys.iter().enumerate() {
                let a = decode(fields[1 + 2 * k], Side::SourceA, line_no)?;
                let b = decode(fields[2 + 2 * k], Side::SourceB, line_no)?;
                if key.a != a || key.b != b {
                    return Err(Error::parse(
                        line_no,
                        format!("key {} does not match address bit", k + 1),
                    ));
                }
            }
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

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MultiKeyOutcome {
    Found(Address),
    /// Every bit resolved but no record lives at the address.
    Unoccupied(Address),
    /// Neither bit key of this zero-based dimension matched.
    ForeignQuery {
        dimension: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiKeyMatch {
    pub outcome: MultiKeyOutcome,
    /// Pairing comparisons performed.
    pub comparisons: usize,
}

fn compare_dimension(
    key: &ParticipantKey,
    dims: &DimensionKeys,
    k: usize,
    bit: u8,
    part: &ComparisonQuery,
) -> Result<bool> {
    let b = key.backend();
    let base = b.raise(key.generator_b(), &key.derive_dimension_exponent(k))?;
    compare_blinded(b, part, &dims.key(k, bit).b, &base)
}

/// Compares dimension `k` of a query against both of the responder's bit
/// keys for that dimension.
pub fn resolve_dimension(
    key: &ParticipantKey,
    dims: &DimensionKeys,
    k: usize,
    part: &ComparisonQuery,
) -> Result<[bool; 2]> {
    Ok([
        compare_dimension(key, dims, k, 0, part)?,
        compare_dimension(key, dims, k, 1, part)?,
    ])
}

/// Resolves one bit per dimension (bit 0 first, bit 1 only if needed), then
/// looks the address up. At most `2d` comparisons.
pub fn match_multikey(key: &ParticipantKey, db: &MultiKeyDatabase, query: &MultiKeyQuery) -> Result<MultiKeyMatch> {
    check_dimensions(db.dimensions(), query.parts.len())?;
    let mut comparisons = 0;
    let mut bits = Vec::with_capacity(query.parts.len());
    for (k, part) in query.parts.iter().enumerate() {
        let mut resolved = None;
        for bit in [0u8, 1] {
            comparisons += 1;
            if compare_dimension(key, &db.dims, k, bit, part)? {
                resolved = Some(bit);
                break;
            }
        }
        match resolved {
            Some(bit) => bits.push(bit),
            None => {
                return Ok(MultiKeyMatch {
                    outcome: MultiKeyOutcome::ForeignQuery { dimension: k },
                    comparisons,
                })
            }
        }
    }
    let address = Address(bits);
    let outcome = if db.rows.contains_key(&address) {
        MultiKeyOutcome::Found(address)
    } else {
        MultiKeyOutcome::Unoccupied(address)
    };
    Ok(MultiKeyMatch { outcome, comparisons })
}

/// Reference search: compares every dimension of every record, `d * rows`
/// comparisons, and returns the first record whose keys all match.
pub fn brute_force_multikey(
    key: &ParticipantKey,
    db: &MultiKeyDatabase,
    query: &MultiKeyQuery,
) -> Result<(Option<Address>, usize)> {
    check_dimensions(db.dimensions(), query.parts.len())?;
    let mut comparisons = 0;
    let mut found = None;
    for address in db.rows.keys() {
        let mut all = true;
        for (k, part) in query.parts.iter().enumerate() {
            comparisons += 1;
            all &= compare_dimension(key, &db.dims, k, address.0[k], part)?;
        }
        if all && found.is_none() {
            found = Some(address.clone());
        }
    }
    Ok((found, comparisons))
}
