//! Production backend over BLS12-381 (arkworks).

use ark_bls12_381::{Bls12_381, Fr, G1Affine, G2Affine};
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup, PrimeGroup};
use ark_ff::{BigInteger, Field, PrimeField, UniformRand, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use rand::Rng;

use crate::error::{Error, Result};

pub(crate) type Gt = PairingOutput<Bls12_381>;

pub(crate) const SCALAR_LEN: usize = 32;
pub(crate) const G1_LEN: usize = 48;
pub(crate) const G2_LEN: usize = 96;
pub(crate) const GT_LEN: usize = 576;

pub(crate) fn random_scalar<R: Rng + ?Sized>(rng: &mut R) -> Fr {
    loop {
        let s = Fr::rand(rng);
        if !s.is_zero() {
            return s;
        }
    }
}

pub(crate) fn inverse(a: &Fr) -> Result<Fr> {
    a.inverse().ok_or(Error::ZeroScalar)
}

pub(crate) fn scalar_to_bytes(a: &Fr) -> Vec<u8> {
    a.into_bigint().to_bytes_be()
}

pub(crate) fn scalar_from_bytes(bytes: &[u8]) -> Result<Fr> {
    if bytes.len() != SCALAR_LEN {
        return Err(Error::InvalidScalar(format!(
            "expected {SCALAR_LEN} bytes, got {}",
            bytes.len()
        )));
    }
    let s = Fr::from_be_bytes_mod_order(bytes);
    if scalar_to_bytes(&s) != bytes {
        return Err(Error::InvalidScalar("not reduced modulo the group order".into()));
    }
    if s.is_zero() {
        return Err(Error::ZeroScalar);
    }
    Ok(s)
}

pub(crate) fn scalar_from_wide(bytes: &[u8]) -> Option<Fr> {
    let s = Fr::from_be_bytes_mod_order(bytes);
    (!s.is_zero()).then_some(s)
}

pub(crate) fn g1_generator() -> G1Affine {
    G1Affine::generator()
}

pub(crate) fn g2_generator() -> G2Affine {
    G2Affine::generator()
}

pub(crate) fn gt_generator() -> Gt {
    Gt::generator()
}

pub(crate) fn pair(x: &G1Affine, y: &G2Affine) -> Gt {
    Bls12_381::pairing(*x, *y)
}

pub(crate) fn raise_g1(x: &G1Affine, k: &Fr) -> G1Affine {
    (*x * k).into_affine()
}

pub(crate) fn raise_g2(x: &G2Affine, k: &Fr) -> G2Affine {
    (*x * k).into_affine()
}

pub(crate) fn raise_gt(x: &Gt, k: &Fr) -> Gt {
    *x * k
}

pub(crate) fn to_bytes<T: CanonicalSerialize>(x: &T) -> Vec<u8> {
    let mut out = Vec::with_capacity(x.compressed_size());
    x.serialize_compressed(&mut out)
        .expect("serializing into a Vec cannot fail");
    out
}

pub(crate) fn from_bytes<T: CanonicalDeserialize>(bytes: &[u8], expected: usize) -> Result<T> {
    if bytes.len() != expected {
        return Err(Error::InvalidElement(format!(
            "expected {expected} bytes, got {}",
            bytes.len()
        )));
    }
    T::deserialize_compressed(bytes).map_err(|e| Error::InvalidElement(e.to_string()))
}
