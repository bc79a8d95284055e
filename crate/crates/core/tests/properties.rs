mod common;

use common::{mulm, rng, two_party, M61};
use dbc::harness::{ResponsePolicy, CANNOT_ANSWER, NO_RECORD};
use dbc::multikey::{
    brute_force_multikey, build_multikey_query, enroll_dimension_keys, match_multikey, setup_dimensions, Address,
    MultiKeyDatabase, MultiKeyOutcome,
};
use dbc::participant::{build_query, respond_compare};
use dbc::{Backend, EntityRegistry, ParticipantKey, Side};
use proptest::prelude::*;

fn m61() -> Backend {
    Backend::default_mock()
}

fn exp() -> impl Strategy<Value = u64> {
    1..M61
}

proptest! {
    #[test]
    fn mock_pairing_is_bilinear(x in exp(), y in exp(), a in exp(), b in exp()) {
        let be = m61();
        let gx = be.mock_element(Side::SourceA, x).unwrap();
        let gy = be.mock_element(Side::SourceB, y).unwrap();
        let (sa, sb) = (be.scalar(a).unwrap(), be.scalar(b).unwrap());
        let lhs = be.pair(&be.raise(&gx, &sa).unwrap(), &be.raise(&gy, &sb).unwrap()).unwrap();
        let rhs = be.raise(&be.pair(&gx, &gy).unwrap(), &be.scalar_mul(&sa, &sb).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        let expected = mulm(mulm(x, y, M61), mulm(a, b, M61), M61);
        prop_assert_eq!(be.mock_dlog(&lhs).unwrap(), expected);
        prop_assert_eq!(lhs.side(), Side::Target);
    }

    #[test]
    fn mock_dlog_recovers_exponent(e in 0..M61, side in prop::sample::select(vec![Side::SourceA, Side::SourceB, Side::Target])) {
        let be = m61();
        let x = be.mock_element(side, e).unwrap();
        prop_assert_eq!(be.mock_dlog(&x).unwrap(), e);
        prop_assert_eq!(x.is_identity(), e == 0);
    }

    #[test]
    fn mock_element_encoding_round_trips(e in 0..M61, side in prop::sample::select(vec![Side::SourceA, Side::SourceB, Side::Target])) {
        let be = m61();
        let x = be.mock_element(side, e).unwrap();
        let text = be.encode_element(&x).unwrap();
        prop_assert_eq!(text.len(), 2 + 16);
        prop_assert_eq!(be.decode_element(&text).unwrap(), x);
        let other = if side == Side::SourceA { Side::SourceB } else { Side::SourceA };
        prop_assert!(be.decode_element_on(other, &text).is_err());
    }

    #[test]
    fn mock_scalar_encoding_round_trips(v in exp()) {
        let be = m61();
        let s = be.scalar(v).unwrap();
        let text = be.encode_scalar(&s).unwrap();
        prop_assert_eq!(&text, &format!("{v:016x}"));
        prop_assert_eq!(be.decode_scalar(&text).unwrap(), s);
    }

    #[test]
    fn ddh_check_matches_exponent_oracle(p in prop::sample::select(vec![5u64, 7, 11, 13, 101]), g in 1u64..5, a in 0u64..101, b in 0u64..101, c in 0u64..101) {
        let be = Backend::mock(p).unwrap();
        let (g, a, b, c) = (g % p, a % p, b % p, c % p);
        prop_assume!(g != 0);
        let el = |side, e| be.mock_element(side, e).unwrap();
        let got = be
            .ddh_check(&el(Side::SourceA, g), &el(Side::SourceA, mulm(g, a, p)), &el(Side::SourceB, b), &el(Side::SourceB, c))
            .unwrap();
        // e(g^a, h^b) = e(g, h^c)  <=>  g*a*b = g*c
        prop_assert_eq!(got, mulm(mulm(g, a, p), b, p) == mulm(g, c, p));
    }

    #[test]
    fn unblinded_index_is_gen_times_record_exponent_times_identifier(seed in any::<u64>(), slots in 1usize..4) {
        let be = m61();
        let labels: Vec<usize> = (0..slots).collect();
        let (fed, _) = two_party(be, slots, &labels, &[], seed);
        let alice = fed.participant("alice").unwrap();
        let gen = be.mock_dlog(alice.key.generator_a()).unwrap();
        prop_assert_eq!(gen, be.mock_dlog(alice.key.generator_b()).unwrap());
        for row in alice.db.rows() {
            let label = alice.oracle_label(row.index.slot).unwrap();
            let n = be.mock_value(&fed.registry().reveal_identifier(label).unwrap()).unwrap();
            let s = be.mock_value(&alice.key.derive_record_exponent(row.index.slot)).unwrap();
            let expected = mulm(gen, mulm(s, n, M61), M61);
            prop_assert_eq!(be.mock_dlog(&row.index.a).unwrap(), expected);
            prop_assert_eq!(be.mock_dlog(&row.index.b).unwrap(), expected);
        }
    }

    #[test]
    fn comparison_agrees_with_label_equality(
        seed in any::<u64>(),
        alice in prop::collection::vec(0usize..6, 1..5),
        bob in prop::collection::vec(0usize..6, 1..5),
    ) {
        let (fed, mut r) = two_party(m61(), 6, &alice, &bob, seed);
        prop_assert_eq!(fed.match_matrix("alice", "bob", &mut r).unwrap(), fed.ground_truth("alice", "bob").unwrap());
        prop_assert_eq!(fed.match_matrix("bob", "alice", &mut r).unwrap(), fed.ground_truth("bob", "alice").unwrap());
    }

    #[test]
    fn query_elements_differ_by_the_identifier(seed in any::<u64>()) {
        let be = m61();
        let (fed, mut r) = two_party(be, 1, &[0], &[], seed);
        let alice = fed.participant("alice").unwrap();
        let n = be.mock_value(&fed.registry().reveal_identifier(&common::entity(0)).unwrap()).unwrap();
        let q = build_query(&alice.key, &alice.db, 0, "p", &mut r).unwrap();
        let (u1, u2) = (be.mock_dlog(&q.u1).unwrap(), be.mock_dlog(&q.u2).unwrap());
        prop_assert_eq!(u2, mulm(u1, n, M61));
    }

    #[test]
    fn foreign_key_never_matches(seed in any::<u64>()) {
        // same label, but the responder row checked with a stranger's key
        let be = m61();
        let (fed, mut r) = two_party(be, 1, &[0], &[0], seed);
        let alice = fed.participant("alice").unwrap();
        let bob = fed.participant("bob").unwrap();
        let q = build_query(&alice.key, &alice.db, 0, "p", &mut r).unwrap();
        prop_assert!(respond_compare(&bob.key, &bob.db.rows()[0].index, &q).unwrap());
        let stranger = ParticipantKey::generate(be, &mut r);
        prop_assert!(!respond_compare(&stranger, &bob.db.rows()[0].index, &q).unwrap());
    }

    #[test]
    fn empty_policy_never_echoes_payload(payload in "[a-z ]{1,24}", predicate in "[a-z ?]{1,24}") {
        let policy = ResponsePolicy::default();
        let v = policy.apply("bob", &predicate, Some(&payload), None);
        prop_assert_eq!(&v, CANNOT_ANSWER);
        prop_assert_eq!(policy.apply("bob", &predicate, None, None), NO_RECORD);
    }

    #[test]
    fn multikey_matches_brute_force(seed in any::<u64>(), d in 1usize..5, occupancy in any::<u16>()) {
        let be = m61();
        let mut r = rng(seed);
        let mut registry = EntityRegistry::new(be);
        let setup = setup_dimensions(&mut registry, d, &mut r).unwrap();
        let submitter = ParticipantKey::generate(be, &mut r);
        let responder = ParticipantKey::generate(be, &mut r);
        let sub_dims = enroll_dimension_keys(&submitter, &setup, &registry, &mut r).unwrap();
        let mut db = MultiKeyDatabase::new(&responder, enroll_dimension_keys(&responder, &setup, &registry, &mut r).unwrap());
        let occupied: Vec<Address> = Address::all(d).enumerate().filter(|(i, _)| occupancy >> i & 1 == 1).map(|(_, a)| a).collect();
        for a in &occupied {
            db.insert(a, &format!("record {a}")).unwrap();
        }
        for a in Address::all(d) {
            let q = build_multikey_query(&submitter, &sub_dims, &a, "p", &mut r).unwrap();
            let fast = match_multikey(&responder, &db, &q).unwrap();
            let (slow, slow_count) = brute_force_multikey(&responder, &db, &q).unwrap();
            prop_assert!(fast.comparisons <= 2 * d);
            prop_assert_eq!(slow_count, d * occupied.len());
            let expected = if occupied.contains(&a) { MultiKeyOutcome::Found(a.clone()) } else { MultiKeyOutcome::Unoccupied(a.clone()) };
            prop_assert_eq!(&fast.outcome, &expected);
            prop_assert_eq!(slow, occupied.contains(&a).then(|| a.clone()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn production_pairing_is_bilinear(seed in any::<u64>()) {
        let be = Backend::Production;
        let mut r = rng(seed);
        let (x, y, a, b) = (be.random_scalar(&mut r), be.random_scalar(&mut r), be.random_scalar(&mut r), be.random_scalar(&mut r));
        let gx = be.raise(&be.generator(Side::SourceA), &x).unwrap();
        let gy = be.raise(&be.generator(Side::SourceB), &y).unwrap();
        let lhs = be.pair(&be.raise(&gx, &a).unwrap(), &be.raise(&gy, &b).unwrap()).unwrap();
        let rhs = be.raise(&be.pair(&gx, &gy).unwrap(), &be.scalar_mul(&a, &b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        // exponents combine in the target: e(g,h)^(x y a b)
        let xyab = be.scalar_mul(&be.scalar_mul(&x, &y).unwrap(), &be.scalar_mul(&a, &b).unwrap()).unwrap();
        let gt = be.pair(&be.generator(Side::SourceA), &be.generator(Side::SourceB)).unwrap();
        prop_assert_eq!(lhs, be.raise(&gt, &xyab).unwrap());
    }

    #[test]
    fn production_encoding_round_trips(seed in any::<u64>()) {
        let be = Backend::Production;
        let mut r = rng(seed);
        let k = be.random_scalar(&mut r);
        prop_assert_eq!(be.decode_scalar(&be.encode_scalar(&k).unwrap()).unwrap(), k);
        for side in [Side::SourceA, Side::SourceB] {
            let x = be.raise(&be.generator(side), &k).unwrap();
            let text = be.encode_element(&x).unwrap();
            prop_assert_eq!(text.len(), 2 + 2 * be.element_len(side));
            prop_assert_eq!(be.decode_element_on(side, &text).unwrap(), x);
        }
        let t = be.pair(&be.generator(Side::SourceA), &be.generator(Side::SourceB)).unwrap();
        let t = be.raise(&t, &k).unwrap();
        prop_assert_eq!(be.decode_element(&be.encode_element(&t).unwrap()).unwrap(), t);
    }

    #[test]
    fn production_comparison_agrees_with_label_equality(
        seed in any::<u64>(),
        alice in prop::collection::vec(0usize..4, 1..3),
        bob in prop::collection::vec(0usize..4, 1..3),
    ) {
        let (fed, mut r) = two_party(Backend::Production, 4, &alice, &bob, seed);
        prop_assert_eq!(fed.match_matrix("alice", "bob", &mut r).unwrap(), fed.ground_truth("alice", "bob").unwrap());
    }
}
