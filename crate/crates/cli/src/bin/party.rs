use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use dbc::harness::{MessageEnvelope, MultiKeyQueryFile, ResponsePolicy};
use dbc::multikey::{
    build_multikey_query, enroll_dimension_keys, match_multikey, Address, DimensionSetup, MultiKeyDatabase,
    MultiKeyOutcome,
};
use dbc::participant::{build_query, enroll_record, keygen, scan_for_match, ScanOutcome};
use dbc::{Backend, ComparisonQuery, EntityRegistry, ParticipantKey, RecordDatabase};
use dbc_cli::{emit, finish, parse_backend, read, rng};
use rand_chacha::ChaCha20Rng;

/// Participant: holds a key and a database indexed by encrypted identifiers.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    #[arg(long, global = true, default_value = "party.key")]
    key: PathBuf,

    #[arg(long, global = true, default_value = "party.db")]
    db: PathBuf,

    /// Multi-key database.
    #[arg(long, global = true, default_value = "party.mkdb")]
    mkdb: PathBuf,

    /// Registry file of the in-process authority used for enrollment.
    #[arg(long, global = true, default_value = "registry.tsv")]
    registry: PathBuf,

    /// Seed for reproducible keys and blinding.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a key and an empty database.
    Keygen {
        #[arg(long, default_value = "mock", value_parser = parse_backend)]
        backend: Backend,
    },
    /// Enroll a record for a registered label.
    Enroll { label: String, payload: String },
    /// Write a comparison request for one of our records.
    Query {
        slot: usize,
        predicate: String,
        /// Role names written into the envelope.
        #[arg(long, default_value = "submitter")]
        from: String,
        #[arg(long, default_value = "responder")]
        to: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report which of our rows a request matches.
    Scan { query_file: PathBuf },
    /// Answer a request from a static policy table.
    Respond {
        query_file: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        /// Our role in the policy table; defaults to the request's recipient.
        #[arg(long)]
        role: Option<String>,
        /// Verdict we obtained by forwarding the question.
        #[arg(long)]
        upstream: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enroll a record at a multi-key address.
    MkEnroll {
        bits: Address,
        payload: String,
        /// Dimension entities from `ted mk-setup`; needed for the first record.
        #[arg(long, default_value = "dims.tsv")]
        setup: PathBuf,
    },
    /// Write a multi-key query for an address.
    MkQuery {
        bits: Address,
        #[arg(long, default_value = "")]
        predicate: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resolve a multi-key query against our multi-key database.
    MkMatch { query_file: PathBuf },
}

fn load_key(path: &Path) -> Result<ParticipantKey> {
    ParticipantKey::load(path).with_context(|| format!("loading key {}", path.display()))
}

fn load_db(path: &Path) -> Result<RecordDatabase> {
    RecordDatabase::load(path).with_context(|| format!("loading database {}", path.display()))
}

fn load_query(path: &Path, backend: Backend) -> Result<(MessageEnvelope, ComparisonQuery)> {
    let env = MessageEnvelope::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let query = env.to_query(backend)?;
    Ok((env, query))
}

fn describe(scan: ScanOutcome) -> String {
    match scan.slot {
        Some(slot) if scan.duplicate => format!("match slot {slot} (warning: several rows match)"),
        Some(slot) => format!("match slot {slot}"),
        None => "no match".into(),
    }
}

fn run(cli: Cli, rng: &mut ChaCha20Rng) -> Result<()> {
    match cli.command {
        Command::Keygen { backend } => {
            for path in [&cli.key, &cli.db] {
                if path.exists() {
                    bail!("{} already exists", path.display());
                }
            }
            let key = keygen(backend, rng);
            key.save(&cli.key)?;
            RecordDatabase::new(&key).save(&cli.db)?;
            println!("key {} ({backend})", key.fingerprint());
        }
        Command::Enroll { label, payload } => {
            let key = load_key(&cli.key)?;
            let mut db = load_db(&cli.db)?;
            let registry = EntityRegistry::load(&cli.registry)?;
            let index = enroll_record(&key, &mut db, &registry, &label, &payload, rng)?;
            db.save(&cli.db)?;
            println!("enrolled slot {}", index.slot);
        }
        Command::Query {
            slot,
            predicate,
            from,
            to,
            out,
        } => {
            let key = load_key(&cli.key)?;
            let db = load_db(&cli.db)?;
            let query = build_query(&key, &db, slot, &predicate, rng)?;
            let env = MessageEnvelope::comparison_request(key.backend(), &from, &to, &query)?;
            emit(out.as_deref(), &env.to_json())?;
        }
        Command::Scan { query_file } => {
            let key = load_key(&cli.key)?;
            let db = load_db(&cli.db)?;
            let (_, query) = load_query(&query_file, key.backend())?;
            println!("{}", describe(scan_for_match(&key, &db, &query)?));
        }
        Command::Respond {
            query_file,
            policy,
            role,
            upstream,
            out,
        } => {
            let key = load_key(&cli.key)?;
            let db = load_db(&cli.db)?;
            let policy = ResponsePolicy::from_text(&read(&policy)?)?;
            let (env, query) = load_query(&query_file, key.backend())?;
            let role = role.unwrap_or_else(|| env.recipient.clone());
            let scan = scan_for_match(&key, &db, &query)?;
            let payload = match scan.slot {
                Some(slot) => Some(db.row(slot)?.payload.as_str()),
                None => None,
            };
            let verdict = policy.apply(&role, &query.predicate, payload, upstream.as_deref());
            let reply = MessageEnvelope::comparison_response(&env.query_id, &role, &env.sender, &verdict);
            emit(out.as_deref(), &reply.to_json())?;
        }
        Command::MkEnroll { bits, payload, setup } => {
            let key = load_key(&cli.key)?;
            let mut db = if cli.mkdb.exists() {
                MultiKeyDatabase::load(&cli.mkdb)?
            } else {
                let setup = DimensionSetup::load(&setup).with_context(|| format!("loading {}", setup.display()))?;
                let registry = EntityRegistry::load(&cli.registry)?;
                MultiKeyDatabase::new(&key, enroll_dimension_keys(&key, &setup, &registry, rng)?)
            };
            db.insert(&bits, &payload)?;
            db.save(&cli.mkdb)?;
            println!("enrolled address {bits}");
        }
        Command::MkQuery { bits, predicate, out } => {
            let key = load_key(&cli.key)?;
            let db = MultiKeyDatabase::load(&cli.mkdb)?;
            let query = build_multikey_query(&key, db.dims(), &bits, &predicate, rng)?;
            emit(
                out.as_deref(),
                &MultiKeyQueryFile::from_query(key.backend(), &query)?.to_json(),
            )?;
        }
        Command::MkMatch { query_file } => {
            let key = load_key(&cli.key)?;
            let db = MultiKeyDatabase::load(&cli.mkdb)?;
            let query = MultiKeyQueryFile::from_json(&read(&query_file)?)?.to_query(key.backend())?;
            let m = match_multikey(&key, &db, &query)?;
            let outcome = match &m.outcome {
                MultiKeyOutcome::Found(a) => format!("found {a}"),
                MultiKeyOutcome::Unoccupied(a) => format!("unoccupied {a}"),
                MultiKeyOutcome::ForeignQuery { dimension } => format!("foreign query at dimension {dimension}"),
            };
            println!("{outcome} ({} comparisons)", m.comparisons);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut rng = rng(cli.seed);
    finish(run(cli, &mut rng))
}
