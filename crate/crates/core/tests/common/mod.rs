#![allow(dead_code)]

use dbc::harness::Federation;
use dbc::Backend;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const M61: u64 = (1 << 61) - 1;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Exponent oracle, independent of the library's modular helpers.
pub fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn entity(i: usize) -> String {
    format!("entity-{i:02}")
}

/// Alice and Bob each enroll `alice` and `bob` (entity numbers, in slot
/// order) against one registry holding entities `0..registered`.
pub fn two_party(
    backend: Backend,
    registered: usize,
    alice: &[usize],
    bob: &[usize],
    seed: u64,
) -> (Federation, ChaCha20Rng) {
    let mut rng = rng(seed);
    let mut fed = Federation::new(backend);
    for i in 0..registered {
        fed.register(&entity(i), &mut rng).unwrap();
    }
    fed.join("alice", &mut rng).unwrap();
    fed.join("bob", &mut rng).unwrap();
    for &i in alice {
        fed.enroll("alice", &entity(i), &format!("personnel file #{i}"), &mut rng)
            .unwrap();
    }
    for &i in bob {
        fed.enroll("bob", &entity(i), &format!("medical chart #{i}"), &mut rng)
            .unwrap();
    }
    (fed, rng)
}
