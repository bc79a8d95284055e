//! Bilinear group arithmetic behind a single runtime-selected backend.
//!
//! Two source sides (`SourceA`, `SourceB`) pair into `Target`. The mock
//! backend stores every element as its exponent relative to a canonical
//! generator of its side, which makes discrete logs readable in tests; it is
//! deliberately insecure. The production backend is BLS12-381, with `SourceA`
//! mapped to G1 and `SourceB` to G2.
//!
//! Text encoding is lowercase hex of a fixed-width byte string. Elements
//! carry a side tag (`A:`, `B:`, `T:`); scalars do not.

mod bls;
pub mod mock;

use std::fmt;
use std::str::FromStr;

use ark_bls12_381::{Fr, G1Affine, G2Affine};
use ark_ec::AffineRepr;
use ark_ff::Zero;
use rand::Rng;

use crate::error::{Error, Result};

pub use mock::DEFAULT_MODULUS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    SourceA,
    SourceB,
    Target,
}

impl Side {
    pub fn tag(self) -> char {
        match self {
            Side::SourceA => 'A',
            Side::SourceB => 'B',
            Side::Target => 'T',
        }
    }

    fn from_tag(tag: &str) -> Option<Side> {
        match tag {
            "A" => Some(Side::SourceA),
            "B" => Some(Side::SourceB),
            "T" => Some(Side::Target),
            _ => None,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Side::SourceA => "SourceA",
            Side::SourceB => "SourceB",
            Side::Target => "Target",
        };
        f.write_str(name)
    }
}

/// Parameters of the mock group: a prime modulus `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MockParams {
    modulus: u64,
}

impl MockParams {
    pub fn new(modulus: u64) -> Result<Self> {
        if !(3..1 << 63).contains(&modulus) || !mock::is_prime(modulus) {
            return Err(Error::InvalidModulus(modulus));
        }
        Ok(MockParams { modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

impl Default for MockParams {
    fn default() -> Self {
        MockParams {
            modulus: DEFAULT_MODULUS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Mock(MockParams),
    Production,
}

/// Nonzero element of the exponent field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Scalar(ScalarRepr);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum ScalarRepr {
    Mock(u64),
    Bls(Fr),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    side: Side,
    repr: ElementRepr,
}

// Kept unboxed so elements stay `Copy`.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum ElementRepr {
    Mock(u64),
    G1(G1Affine),
    G2(G2Affine),
    Gt(bls::Gt),
}

impl GroupElement {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn is_identity(&self) -> bool {
        match &self.repr {
            ElementRepr::Mock(e) => *e == 0,
            ElementRepr::G1(x) => x.is_zero(),
            ElementRepr::G2(x) => x.is_zero(),
            ElementRepr::Gt(x) => x.is_zero(),
        }
    }

    fn expect_side(&self, op: &'static str, expected: Side) -> Result<()> {
        if self.side != expected {
            return Err(Error::SideMismatch {
                op,
                expected,
                found: self.side,
            });
        }
        Ok(())
    }
}

impl Backend {
    pub fn mock(modulus: u64) -> Result<Self> {
        Ok(Backend::Mock(MockParams::new(modulus)?))
    }

    pub fn default_mock() -> Self {
        Backend::Mock(MockParams::default())
    }

    pub fn is_mock(&self) -> bool {
        matches!(self, Backend::Mock(_))
    }

    /// Width in bytes of an encoded scalar.
    pub fn scalar_len(&self) -> usize {
        match self {
            Backend::Mock(_) => 8,
            Backend::Production => bls::SCALAR_LEN,
        }
    }

    /// Width in bytes of an encoded element on `side`.
    pub fn element_len(&self, side: Side) -> usize {
        match (self, side) {
            (Backend::Mock(_), _) => 8,
            (Backend::Production, Side::SourceA) => bls::G1_LEN,
            (Backend::Production, Side::SourceB) => bls::G2_LEN,
            (Backend::Production, Side::Target) => bls::GT_LEN,
        }
    }

    // ---- scalars ----

    /// Uniform nonzero scalar. The mock draws masked 64-bit words and
    /// rejects anything outside `[1, p-1]`.
    pub fn random_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> Scalar {
        match self {
            Backend::Mock(params) => {
                let p = params.modulus;
                let mask = mock::sample_mask(p);
                loop {
                    let v = rng.next_u64() & mask;
                    if v != 0 && v < p {
                        return Scalar(ScalarRepr::Mock(v));
                    }
                }
            }
            Backend::Production => Scalar(ScalarRepr::Bls(bls::random_scalar(rng))),
        }
    }

    /// Scalar from a small integer. Mock values must lie in `[1, p-1]`.
    pub fn scalar(&self, value: u64) -> Result<Scalar> {
        if value == 0 {
            return Err(Error::ZeroScalar);
        }
        match self {
            Backend::Mock(params) => {
                if value >= params.modulus {
                    return Err(Error::InvalidScalar(format!(
                        "{value} is not below the modulus {}",
                        params.modulus
                    )));
                }
                Ok(Scalar(ScalarRepr::Mock(value)))
            }
            Backend::Production => Ok(Scalar(ScalarRepr::Bls(Fr::from(value)))),
        }
    }

    /// Maps a 64-byte pseudorandom block to a scalar, or `None` when the
    /// block must be rejected (out of range for the mock, zero for either).
    pub fn scalar_from_block(&self, block: &[u8; 64]) -> Option<Scalar> {
        match self {
            Backend::Mock(params) => {
                let p = params.modulus;
                let raw = u64::from_be_bytes(block[..8].try_into().unwrap());
                let v = raw & mock::sample_mask(p);
                (v != 0 && v < p).then_some(Scalar(ScalarRepr::Mock(v)))
            }
            Backend::Production => bls::scalar_from_wide(block).map(|s| Scalar(ScalarRepr::Bls(s))),
        }
    }

    pub fn scalar_mul(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        match (self, self.check_scalar(a)?, self.check_scalar(b)?) {
            (Backend::Mock(params), ScalarRepr::Mock(x), ScalarRepr::Mock(y)) => {
                Ok(Scalar(ScalarRepr::Mock(mock::mul_mod(x, y, params.modulus))))
            }
            (Backend::Production, ScalarRepr::Bls(x), ScalarRepr::Bls(y)) => Ok(Scalar(ScalarRepr::Bls(x * y))),
            _ => Err(Error::BackendMismatch),
        }
    }

    pub fn scalar_inverse(&self, a: &Scalar) -> Result<Scalar> {
        match (self, self.check_scalar(a)?) {
            (Backend::Mock(params), ScalarRepr::Mock(x)) => {
                Ok(Scalar(ScalarRepr::Mock(mock::inv_mod(x, params.modulus))))
            }
            (Backend::Production, ScalarRepr::Bls(x)) => Ok(Scalar(ScalarRepr::Bls(bls::inverse(&x)?))),
            _ => Err(Error::BackendMismatch),
        }
    }

    /// Integer value of a mock scalar.
    pub fn mock_value(&self, a: &Scalar) -> Result<u64> {
        match self.check_scalar(a)? {
            ScalarRepr::Mock(v) => Ok(v),
            ScalarRepr::Bls(_) => Err(Error::MockOnly),
        }
    }

    fn check_scalar(&self, a: &Scalar) -> Result<ScalarRepr> {
        match (self, a.0) {
            (Backend::Mock(params), ScalarRepr::Mock(v)) if v != 0 && v < params.modulus => Ok(a.0),
            (Backend::Mock(params), ScalarRepr::Mock(v)) => Err(Error::InvalidScalar(format!(
                "{v} is outside [1, {}]",
                params.modulus - 1
            ))),
            (Backend::Production, ScalarRepr::Bls(_)) => Ok(a.0),
            _ => Err(Error::BackendMismatch),
        }
    }

    pub fn scalar_bytes(&self, a: &Scalar) -> Result<Vec<u8>> {
        Ok(match self.check_scalar(a)? {
            ScalarRepr::Mock(v) => v.to_be_bytes().to_vec(),
            ScalarRepr::Bls(s) => bls::scalar_to_bytes(&s),
        })
    }

    pub fn scalar_from_bytes(&self, bytes: &[u8]) -> Result<Scalar> {
        match self {
            Backend::Mock(_) => {
                let raw: [u8; 8] = bytes
                    .try_into()
                    .map_err(|_| Error::InvalidScalar(format!("expected 8 bytes, got {}", bytes.len())))?;
                self.scalar(u64::from_be_bytes(raw))
            }
            Backend::Production => Ok(Scalar(ScalarRepr::Bls(bls::scalar_from_bytes(bytes)?))),
        }
    }

    pub fn encode_scalar(&self, a: &Scalar) -> Result<String> {
        Ok(hex::encode(self.scalar_bytes(a)?))
    }

    pub fn decode_scalar(&self, text: &str) -> Result<Scalar> {
        let bytes = decode_hex(text, self.scalar_len()).map_err(Error::InvalidScalar)?;
        self.scalar_from_bytes(&bytes)
    }

    // ---- group elements ----

    /// Canonical generator of `side`; on the target side this is the pairing
    /// of the two source generators.
    pub fn generator(&self, side: Side) -> GroupElement {
        let repr = match (self, side) {
            (Backend::Mock(_), _) => ElementRepr::Mock(1),
            (Backend::Production, Side::SourceA) => ElementRepr::G1(bls::g1_generator()),
            (Backend::Production, Side::SourceB) => ElementRepr::G2(bls::g2_generator()),
            (Backend::Production, Side::Target) => ElementRepr::Gt(bls::gt_generator()),
        };
        GroupElement { side, repr }
    }

    /// `x^k`, staying on the side of `x`.
    pub fn raise(&self, x: &GroupElement, k: &Scalar) -> Result<GroupElement> {
        let repr = match (self, self.check_element(x)?, self.check_scalar(k)?) {
            (Backend::Mock(params), ElementRepr::Mock(e), ScalarRepr::Mock(k)) => {
                ElementRepr::Mock(mock::mul_mod(e, k, params.modulus))
            }
            (Backend::Production, ElementRepr::G1(p), ScalarRepr::Bls(k)) => ElementRepr::G1(bls::raise_g1(&p, &k)),
            (Backend::Production, ElementRepr::G2(p), ScalarRepr::Bls(k)) => ElementRepr::G2(bls::raise_g2(&p, &k)),
            (Backend::Production, ElementRepr::Gt(p), ScalarRepr::Bls(k)) => ElementRepr::Gt(bls::raise_gt(&p, &k)),
            _ => return Err(Error::BackendMismatch),
        };
        Ok(GroupElement { side: x.side, repr })
    }

    /// The bilinear map `e: SourceA x SourceB -> Target`.
    pub fn pair(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        x.expect_side("pair", Side::SourceA)?;
        y.expect_side("pair", Side::SourceB)?;
        let repr = match (self, self.check_element(x)?, self.check_element(y)?) {
            (Backend::Mock(params), ElementRepr::Mock(a), ElementRepr::Mock(b)) => {
                ElementRepr::Mock(mock::mul_mod(a, b, params.modulus))
            }
            (Backend::Production, ElementRepr::G1(a), ElementRepr::G2(b)) => ElementRepr::Gt(bls::pair(&a, &b)),
            _ => return Err(Error::BackendMismatch),
        };
        Ok(GroupElement {
            side: Side::Target,
            repr,
        })
    }

    /// Decides `dlog(gc) = dlog_g(ga) * dlog(gb)` with two pairings:
    /// `e(ga, gb) == e(g, gc)`. Needs the base `g` on `SourceA`.
    pub fn ddh_check(&self, g: &GroupElement, ga: &GroupElement, gb: &GroupElement, gc: &GroupElement) -> Result<bool> {
        g.expect_side("ddh_check", Side::SourceA)?;
        ga.expect_side("ddh_check", Side::SourceA)?;
        gb.expect_side("ddh_check", Side::SourceB)?;
        gc.expect_side("ddh_check", Side::SourceB)?;
        Ok(self.pair(ga, gb)? == self.pair(g, gc)?)
    }

    /// Exponent of `x` relative to its side's canonical generator. Only the
    /// mock backend can answer; the production backend always errors.
    pub fn mock_dlog(&self, x: &GroupElement) -> Result<u64> {
        match self.check_element(x)? {
            ElementRepr::Mock(e) => Ok(e),
            _ => Err(Error::DlogUnavailable),
        }
    }

    /// Builds the mock element with the given exponent (0 is the identity).
    pub fn mock_element(&self, side: Side, exponent: u64) -> Result<GroupElement> {
        match self {
            Backend::Mock(params) if exponent < params.modulus => Ok(GroupElement {
                side,
                repr: ElementRepr::Mock(exponent),
            }),
            Backend::Mock(params) => Err(Error::InvalidElement(format!(
                "exponent {exponent} is not below the modulus {}",
                params.modulus
            ))),
            Backend::Production => Err(Error::MockOnly),
        }
    }

    fn check_element(&self, x: &GroupElement) -> Result<ElementRepr> {
        match (self, x.repr) {
            (Backend::Mock(params), ElementRepr::Mock(e)) if e < params.modulus => Ok(x.repr),
            (Backend::Mock(_), ElementRepr::Mock(e)) => {
                Err(Error::InvalidElement(format!("mock exponent {e} out of range")))
            }
            (Backend::Production, ElementRepr::G1(_))
            | (Backend::Production, ElementRepr::G2(_))
            | (Backend::Production, ElementRepr::Gt(_)) => Ok(x.repr),
            _ => Err(Error::BackendMismatch),
        }
    }

    /// Canonical fixed-width bytes of `x`, without the side tag.
    pub fn element_bytes(&self, x: &GroupElement) -> Result<Vec<u8>> {
        Ok(match self.check_element(x)? {
            ElementRepr::Mock(e) => e.to_be_bytes().to_vec(),
            ElementRepr::G1(p) => bls::to_bytes(&p),
            ElementRepr::G2(p) => bls::to_bytes(&p),
            ElementRepr::Gt(p) => bls::to_bytes(&p),
        })
    }

    pub fn element_from_bytes(&self, side: Side, bytes: &[u8]) -> Result<GroupElement> {
        let expected = self.element_len(side);
        match self {
            Backend::Mock(_) => {
                let raw: [u8; 8] = bytes
                    .try_into()
                    .map_err(|_| Error::InvalidElement(format!("expected {expected} bytes, got {}", bytes.len())))?;
                self.mock_element(side, u64::from_be_bytes(raw))
            }
            Backend::Production => {
                let repr = match side {
                    Side::SourceA => ElementRepr::G1(bls::from_bytes(bytes, expected)?),
                    Side::SourceB => ElementRepr::G2(bls::from_bytes(bytes, expected)?),
                    Side::Target => ElementRepr::Gt(bls::from_bytes(bytes, expected)?),
                };
                Ok(GroupElement { side, repr })
            }
        }
    }

    /// `"<tag>:<hex>"`, e.g. `A:000000000000002a`.
    pub fn encode_element(&self, x: &GroupElement) -> Result<String> {
        Ok(format!("{}:{}", x.side.tag(), hex::encode(self.element_bytes(x)?)))
    }

    pub fn decode_element(&self, text: &str) -> Result<GroupElement> {
        let (tag, body) = text
            .split_once(':')
            .ok_or_else(|| Error::InvalidElement(format!("missing side tag in {text:?}")))?;
        let side = Side::from_tag(tag).ok_or_else(|| Error::InvalidElement(format!("unknown side tag {tag:?}")))?;
        let bytes = decode_hex(body, self.element_len(side)).map_err(Error::InvalidElement)?;
        self.element_from_bytes(side, &bytes)
    }

    /// Decodes and checks that the element lives on `side`.
    pub fn decode_element_on(&self, side: Side, text: &str) -> Result<GroupElement> {
        let x = self.decode_element(text)?;
        x.expect_side("decode", side)?;
        Ok(x)
    }

    /// Header line identifying the backend in persisted files.
    pub fn header(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Mock(params) => write!(f, "mock p={}", params.modulus),
            Backend::Production => f.write_str("prod bls12-381"),
        }
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(p) = s.strip_prefix("mock p=") {
            let p = p
                .parse::<u64>()
                .map_err(|e| Error::InvalidScalar(format!("bad modulus {p:?}: {e}")))?;
            return Backend::mock(p);
        }
        if s == "prod bls12-381" {
            return Ok(Backend::Production);
        }
        Err(Error::Script(format!("unrecognized backend header {s:?}")))
    }
}

fn decode_hex(text: &str, width: usize) -> std::result::Result<Vec<u8>, String> {
    if text.len() != 2 * width {
        return Err(format!("expected {} hex digits, got {}", 2 * width, text.len()));
    }
    if text.bytes().any(|b| b.is_ascii_uppercase()) {
        return Err("hex must be lowercase".into());
    }
    hex::decode(text).map_err(|e| e.to_string())
}
