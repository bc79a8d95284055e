//! Acceptance suite: one PASS/FAIL line per criterion, each with its own
//! time limit. Exits nonzero if any criterion fails.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use dbc::harness::Federation;
use dbc::multikey::{
    brute_force_multikey, build_multikey_query, enroll_dimension_keys, match_multikey, setup_dimensions, Address,
    MultiKeyDatabase, MultiKeyOutcome,
};
use dbc::participant::{build_query, respond_compare, PendingEnrollment};
use dbc::{Backend, EntityRegistry, ParticipantKey, RecordDatabase, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

const M61: u64 = (1 << 61) - 1;

fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn label(i: usize) -> String {
    format!("SN-{i:03}")
}

/// Alice and Bob enroll the same `n` labels in opposite orders.
fn federation(backend: Backend, n: usize, seed: u64) -> Result<(Federation, ChaCha20Rng), String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut fed = Federation::new(backend);
    for i in 0..n {
        fed.register(&label(i), &mut rng).map_err(fail)?;
    }
    fed.join("alice", &mut rng).map_err(fail)?;
    fed.join("bob", &mut rng).map_err(fail)?;
    for i in 0..n {
        fed.enroll("alice", &label(i), &format!("personnel record {i}"), &mut rng)
            .map_err(fail)?;
    }
    for i in (0..n).rev() {
        fed.enroll("bob", &label(i), &format!("medical record {i}"), &mut rng)
            .map_err(fail)?;
    }
    Ok((fed, rng))
}

fn correctness() -> Outcome {
    let mut agree = 0;
    for backend in [Backend::default_mock(), Backend::Production] {
        let (fed, mut rng) = federation(backend, 16, 1)?;
        let alice = fed.participant("alice").map_err(fail)?;
        let bob = fed.participant("bob").map_err(fail)?;
        for i in 0..alice.db.len() {
            let q = build_query(&alice.key, &alice.db, i, "match?", &mut rng).map_err(fail)?;
            for row in bob.db.rows() {
                let verdict = respond_compare(&bob.key, &row.index, &q).map_err(fail)?;
                let oracle = alice.oracle_label(i) == bob.oracle_label(row.index.slot);
                ensure(verdict == oracle, || {
                    format!("{backend}: query {i} row {} disagrees", row.index.slot)
                })?;
                agree += 1;
            }
        }
    }
    Ok(format!(
        "{agree}/512 verdicts equal label equality (mock p=2^61-1 and BLS12-381)"
    ))
}

fn bilinearity() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for backend in [Backend::default_mock(), Backend::Production] {
        for t in 0..100 {
            let [x, y, a, b] = [(); 4].map(|_| backend.random_scalar(&mut rng));
            let gx = backend.raise(&backend.generator(Side::SourceA), &x).map_err(fail)?;
            let gy = backend.raise(&backend.generator(Side::SourceB), &y).map_err(fail)?;
            let lhs = backend
                .pair(
                    &backend.raise(&gx, &a).map_err(fail)?,
                    &backend.raise(&gy, &b).map_err(fail)?,
                )
                .map_err(fail)?;
            let ab = backend.scalar_mul(&a, &b).map_err(fail)?;
            let rhs = backend
                .raise(&backend.pair(&gx, &gy).map_err(fail)?, &ab)
                .map_err(fail)?;
            ensure(lhs == rhs, || format!("{backend}: tuple {t} fails"))?;
            if backend.is_mock() {
                let v = |s| backend.mock_value(s).unwrap();
                let expected = mulm(mulm(v(&x), v(&y), M61), mulm(v(&a), v(&b), M61), M61);
                ensure(backend.mock_dlog(&lhs).map_err(fail)? == expected, || {
                    format!("mock tuple {t}: exponent")
                })?;
            }
        }
    }
    Ok("200/200 tuples satisfy e(x^a, y^b) = e(x, y)^(ab)".into())
}

fn ddh_sweep() -> Outcome {
    let p = 7;
    let backend = Backend::mock(p).map_err(fail)?;
    let el = |side, e| backend.mock_element(side, e).unwrap();
    let g = el(Side::SourceA, 1);
    let mut tuples = 0;
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                let got = backend
                    .ddh_check(&g, &el(Side::SourceA, a), &el(Side::SourceB, b), &el(Side::SourceB, c))
                    .map_err(fail)?;
                ensure(got == (a * b % p == c), || format!("disagreement at ({a}, {b}, {c})"))?;
                tuples += 1;
            }
        }
    }
    Ok(format!("{tuples} tuples, 0 disagreements"))
}

fn enrollment_algebra() -> Outcome {
    let backend = Backend::default_mock();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let key = ParticipantKey::from_parts(
        backend,
        &backend.scalar(1).map_err(fail)?,
        backend.scalar(1).map_err(fail)?,
        [7; 32],
    )
    .map_err(fail)?;
    for t in 0..1000 {
        let n = rng.gen_range(1..M61);
        let s = rng.gen_range(1..M61);
        let r = rng.gen_range(2..M61);
        let registry = EntityRegistry::from_text(&format!("{}\nX\t{n:016x}\n", backend.header())).map_err(fail)?;
        let (pending, request) = PendingEnrollment::begin(
            &key,
            0,
            "X",
            &backend.scalar(s).map_err(fail)?,
            &backend.scalar(r).map_err(fail)?,
        )
        .map_err(fail)?;
        let index = pending
            .complete(&registry.issue_raised(&request).map_err(fail)?)
            .map_err(fail)?;
        let expected = mulm(s, n, M61);
        for x in [&index.a, &index.b] {
            ensure(backend.mock_dlog(x).map_err(fail)? == expected, || {
                format!("triple {t} (N={n}, s={s}, r={r})")
            })?;
        }
    }
    Ok("1000/1000 unblinded exponents equal s_i*N mod p".into())
}

fn freshness() -> Outcome {
    let backend = Backend::default_mock();
    let (fed, mut rng) = federation(backend, 1, 5)?;
    let alice = fed.participant("alice").map_err(fail)?;
    let n = backend
        .mock_value(&fed.registry().reveal_identifier(&label(0)).unwrap())
        .map_err(fail)?;
    let mut seen = HashSet::new();
    let mut ratios = HashSet::new();
    for _ in 0..100 {
        let q = build_query(&alice.key, &alice.db, 0, "p", &mut rng).map_err(fail)?;
        seen.insert((
            backend.element_bytes(&q.u1).map_err(fail)?,
            backend.element_bytes(&q.u2).map_err(fail)?,
        ));
        let (u1, u2) = (
            backend.mock_dlog(&q.u1).map_err(fail)?,
            backend.mock_dlog(&q.u2).map_err(fail)?,
        );
        // u2 / u1 in the exponent: u2 * u1^{-1} mod p
        ratios.insert(mulm(u2, pow(u1, M61 - 2, M61), M61));
    }
    ensure(seen.len() == 100, || format!("only {} distinct pairs", seen.len()))?;
    ensure(ratios.len() == 1, || format!("{} distinct ratios", ratios.len()))?;
    ensure(ratios.contains(&n), || "ratio is not the identifier".into())?;
    Ok("100 distinct (u1, u2) pairs, exponent ratio u2/u1 constant and equal to N".into())
}

fn pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulm(acc, b, p);
        }
        b = mulm(b, b, p);
        e >>= 1;
    }
    acc
}

fn unlinkability() -> Outcome {
    for backend in [Backend::default_mock(), Backend::Production] {
        let (fed, _) = federation(backend, 50, 6)?;
        let alice = fed.participant("alice").map_err(fail)?;
        let bob = fed.participant("bob").map_err(fail)?;
        let set = |db: &RecordDatabase| -> HashSet<String> {
            db.rows()
                .iter()
                .flat_map(|r| [&r.index.a, &r.index.b])
                .map(|x| backend.encode_element(x).unwrap())
                .collect()
        };
        let common = set(&alice.db).intersection(&set(&bob.db)).count();
        ensure(common == 0, || format!("{backend}: {common} shared index values"))?;
        for (name, p) in fed.participants() {
            let text = p.db.to_text();
            for l in fed.registry().labels() {
                let n = backend
                    .encode_scalar(&fed.registry().reveal_identifier(l).unwrap())
                    .map_err(fail)?;
                ensure(!text.contains(l) && !text.contains(&n), || {
                    format!("{name}'s database leaks {l}")
                })?;
            }
            let master = backend.encode_scalar(p.key.master_secret()).map_err(fail)?;
            ensure(
                !text.contains(&master) && !text.contains(&hex::encode(p.key.prf_key())),
                || format!("{name}'s database leaks a secret"),
            )?;
        }
    }
    Ok("50 shared labels: 0 common index values; no labels, N or secrets in databases (both backends)".into())
}

fn multikey() -> Outcome {
    let backend = Backend::default_mock();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut registry = EntityRegistry::new(backend);
    let setup = setup_dimensions(&mut registry, 3, &mut rng).map_err(fail)?;
    let carol = ParticipantKey::generate(backend, &mut rng);
    let bob = ParticipantKey::generate(backend, &mut rng);
    let carol_dims = enroll_dimension_keys(&carol, &setup, &registry, &mut rng).map_err(fail)?;
    let bob_dims = enroll_dimension_keys(&bob, &setup, &registry, &mut rng).map_err(fail)?;
    let mut db = MultiKeyDatabase::new(&bob, bob_dims);
    for a in Address::all(3) {
        db.insert(&a, &format!("record at {a}")).map_err(fail)?;
    }
    let mut worst = 0;
    for a in Address::all(3) {
        let q = build_multikey_query(&carol, &carol_dims, &a, "p", &mut rng).map_err(fail)?;
        let fast = match_multikey(&bob, &db, &q).map_err(fail)?;
        let (slow, slow_count) = brute_force_multikey(&bob, &db, &q).map_err(fail)?;
        ensure(fast.outcome == MultiKeyOutcome::Found(a.clone()), || {
            format!("{a}: {:?}", fast.outcome)
        })?;
        ensure(slow.as_ref() == Some(&a), || format!("{a}: brute force found {slow:?}"))?;
        ensure(fast.comparisons <= 6, || {
            format!("{a}: {} comparisons", fast.comparisons)
        })?;
        ensure(slow_count == 24, || {
            format!("{a}: brute force made {slow_count} comparisons")
        })?;
        worst = worst.max(fast.comparisons);
    }
    Ok(format!("8/8 addresses agree; at most {worst} comparisons vs 24"))
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/captain-smith.tsv")
}

fn harness_run(workdir: &Path) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_harness"))
        .arg("run")
        .arg(fixture())
        .args(["--seed", "2024", "--workdir"])
        .arg(workdir)
        .output()
        .map_err(fail)?;
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    ensure(out.status.success(), || {
        format!("harness exited with {}: {stdout}", out.status)
    })?;
    Ok(stdout)
}

fn inbox(workdir: &Path, actor: &str) -> Result<String, String> {
    let mut text = String::new();
    let suffix = format!("-to-{actor}.json");
    for entry in fs::read_dir(workdir.join("messages")).map_err(fail)? {
        let path = entry.map_err(fail)?.path();
        if path.to_string_lossy().ends_with(&suffix) {
            text.push_str(&fs::read_to_string(&path).map_err(fail)?);
        }
    }
    Ok(text)
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir.join("messages"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .chain([dir.join("summary.txt")])
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn scenario() -> Outcome {
    let tmp = tempfile::tempdir().map_err(fail)?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let stdout = harness_run(&a)?;
    harness_run(&b)?;
    let verdict = "invocation\tq1\tcarol\talice\tnot able to fly CF-18 combat missions\n";
    ensure(stdout.contains(verdict), || {
        format!("Carol's verdict missing:\n{stdout}")
    })?;

    let carol = inbox(&a, "carol")?;
    ensure(!carol.contains("pregnant") && !carol.contains("C55-111-555"), || {
        "Carol's inbox leaks".into()
    })?;
    ensure(carol.contains("not able to fly CF-18 combat missions"), || {
        "Carol never received the verdict".into()
    })?;
    let alice = inbox(&a, "alice")?;
    ensure(!alice.contains("C55-111-555"), || {
        "Alice's inbox contains the label".into()
    })?;
    let bob = inbox(&a, "bob")?;
    ensure(
        !bob.contains("C55-111-555") && !bob.contains("CF-18 pilot, current"),
        || "Bob's inbox leaks".into(),
    )?;

    let (ta, tb) = (tree(&a), tree(&b));
    ensure(ta.len() == 17 && ta == tb, || "same-seed runs differ".into())?;
    Ok(
        "Carol's verdict is \"not able to fly CF-18 combat missions\"; 3 inbox greps clean; 2 runs byte-identical"
            .into(),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("correctness, 16x16 on both backends", 10, correctness),
        ("bilinearity, 100 tuples per backend", 5, bilinearity),
        ("ddh_check sweep at p=7", 1, ddh_sweep),
        ("enrollment algebra, 1000 triples", 5, enrollment_algebra),
        ("query rerandomization, 100 queries", 2, freshness),
        ("cross-database unlinkability, 50 labels", 2, unlinkability),
        ("multikey d=3 vs brute force", 5, multikey),
        ("Captain Smith scenario via harness run", 10, scenario),
    ];
    let mut failed = 0;
    for (n, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let limit = Duration::from_secs(limit);
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} {}. {name}: {detail} [{:.3}s / {}s]",
            if ok { "PASS" } else { "FAIL" },
            n + 1,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
