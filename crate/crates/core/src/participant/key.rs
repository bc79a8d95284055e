use std::fmt;
use std::fs;
use std::path::Path;

use hmac::{Hmac, Mac};
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::bilinear::{Backend, GroupElement, Scalar, Side};
use crate::error::{Error, Result};
use crate::text;

type HmacSha256 = Hmac<Sha256>;

pub const PRF_KEY_LEN: usize = 32;

const RECORD_DOMAIN: &[u8] = b"dbc/record-exponent";
const DIMENSION_DOMAIN: &[u8] = b"dbc/dimension-exponent";

/// A participant's private key material.
///
/// Both generators are raised from the canonical generators by one shared
/// secret exponent, so an index enrolled on both sides carries the same
/// exponent everywhere.
#[derive(Clone, PartialEq, Eq)]
pub struct ParticipantKey {
    backend: Backend,
    generator_a: GroupElement,
    generator_b: GroupElement,
    master: Scalar,
    prf_key: [u8; PRF_KEY_LEN],
}

impl fmt::Debug for ParticipantKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParticipantKey")
            .field("backend", &self.backend)
            .field("fingerprint", &self.fingerprint())
            .finish_non_exhaustive()
    }
}

impl ParticipantKey {
    pub fn generate<R: Rng + ?Sized>(backend: Backend, rng: &mut R) -> Self {
        let generator_exponent = backend.random_scalar(rng);
        let master = backend.random_scalar(rng);
        let mut prf_key = [0u8; PRF_KEY_LEN];
        rng.fill_bytes(&mut prf_key);
        Self::from_parts(backend, &generator_exponent, master, prf_key)
            .expect("freshly sampled scalars belong to the backend")
    }

    /// Assembles a key from explicit secrets.
    pub fn from_parts(
        backend: Backend,
        generator_exponent: &Scalar,
        master: Scalar,
        prf_key: [u8; PRF_KEY_LEN],
    ) -> Result<Self> {
        let generator_a = backend.raise(&backend.generator(Side::SourceA), generator_exponent)?;
        let generator_b = backend.raise(&backend.generator(Side::SourceB), generator_exponent)?;
        backend.scalar_bytes(&master)?;
        Ok(ParticipantKey {
            backend,
            generator_a,
            generator_b,
            master,
            prf_key,
        })
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn generator_a(&self) -> &GroupElement {
        &self.generator_a
    }

    pub fn generator_b(&self) -> &GroupElement {
        &self.generator_b
    }

    pub fn master_secret(&self) -> &Scalar {
        &self.master
    }

    pub fn prf_key(&self) -> &[u8; PRF_KEY_LEN] {
        &self.prf_key
    }

    /// Short public identifier derived from the generator pair.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for g in [&self.generator_a, &self.generator_b] {
            h.update(self.backend.encode_element(g).expect("own generators"));
            h.update(b"\n");
        }
        hex::encode(&h.finalize()[..8])
    }

    /// Per-record exponent `s_i = s * F(i)`, where `F` is HMAC-SHA256 under
    /// the PRF key reduced into the nonzero scalars.
    pub fn derive_record_exponent(&self, slot: usize) -> Scalar {
        self.derive(RECORD_DOMAIN, slot as u64)
    }

    /// Exponent for bit dimension `dimension` of the multi-key index.
    pub fn derive_dimension_exponent(&self, dimension: usize) -> Scalar {
        self.derive(DIMENSION_DOMAIN, dimension as u64)
    }

    fn derive(&self, domain: &[u8], index: u64) -> Scalar {
        let offset = (0u32..)
            .find_map(|counter| self.backend.scalar_from_block(&self.prf_block(domain, index, counter)))
            .expect("rejection sampling terminates");
        self.backend
            .scalar_mul(&self.master, &offset)
            .expect("derived scalars belong to the key's backend")
    }

    fn prf_block(&self, domain: &[u8], index: u64, counter: u32) -> [u8; 64] {
        let mut block = [0u8; 64];
        for (half, chunk) in block.chunks_mut(32).enumerate() {
            let mut mac = HmacSha256::new_from_slice(&self.prf_key).expect("HMAC accepts any key length");
            mac.update(domain);
            mac.update(&index.to_be_bytes());
            mac.update(&counter.to_be_bytes());
            mac.update(&[half as u8]);
            chunk.copy_from_slice(&mac.finalize().into_bytes());
        }
        block
    }

    /// Backend header, then tab-separated `gen A:<hex> B:<hex>`,
    /// `master <hex>` and `prf <hex>` lines.
    pub fn to_text(&self) -> String {
        let b = self.backend;
        format!(
            "{}\ngen\t{}\t{}\nmaster\t{}\nprf\t{}\n",
            b.header(),
            b.encode_element(&self.generator_a).expect("own generator"),
            b.encode_element(&self.generator_b).expect("own generator"),
            b.encode_scalar(&self.master).expect("own secret"),
            hex::encode(self.prf_key),
        )
    }

    pub fn from_text(input: &str) -> Result<Self> {
        let lines: Vec<&str> = input.lines().collect();
        if lines.len() < 4 {
            return Err(Error::parse(lines.len() + 1, "truncated key file"));
        }
        let backend: Backend = lines[0].parse().map_err(|e: Error| Error::parse(1, e.to_string()))?;
        let at = |line_no: usize| move |e: Error| Error::parse(line_no, e.to_string());

        let gens = text::keyed(lines[1], "gen", 2)?;
        let (ga, gb) = gens
            .split_once('\t')
            .ok_or_else(|| Error::parse(2, "expected two generators"))?;
        let generator_a = backend.decode_element_on(Side::SourceA, ga).map_err(at(2))?;
        let generator_b = backend.decode_element_on(Side::SourceB, gb).map_err(at(2))?;
        if generator_a.is_identity() || generator_b.is_identity() {
            return Err(Error::parse(2, "generator is the identity"));
        }
        let master = backend
            .decode_scalar(text::keyed(lines[2], "master", 3)?)
            .map_err(at(3))?;
        let prf_hex = text::keyed(lines[3], "prf", 4)?;
        let prf_key: [u8; PRF_KEY_LEN] = hex::decode(prf_hex)
            .ok()
            .and_then(|v| v.try_into().ok())
            .ok_or_else(|| Error::parse(4, "prf key must be 32 bytes of hex"))?;
        Ok(ParticipantKey {
            backend,
            generator_a,
            generator_b,
            master,
            prf_key,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}
