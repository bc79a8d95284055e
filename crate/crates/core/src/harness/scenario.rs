//! Script-ordered driver. Every message goes through a file under
//! `<workdir>/messages/`, and the recipient acts on what it reads back.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::bilinear::Backend;
use crate::error::{Error, Result};
use crate::participant::{self, ComparisonQuery, PendingEnrollment, ScanOutcome};

use super::envelope::{MessageEnvelope, MessageKind};
use super::federation::Federation;
use super::script::{Action, ScenarioScript, Step, AUTHORITY};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub file: String,
    pub envelope: MessageEnvelope,
    pub json: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvocationStatus {
    Pending,
    /// A forward whose parent query matched nothing; never sent.
    Skipped,
    Answered(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invocation {
    pub submitter: String,
    pub responder: String,
    pub predicate: String,
    pub query_id: Option<String>,
    pub scan: Option<ScanOutcome>,
    pub child: Option<String>,
    pub status: InvocationStatus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub backend: Backend,
    pub seed: u64,
    pub transcript: Vec<TranscriptEntry>,
    pub invocations: BTreeMap<String, Invocation>,
    /// What each actor learned, in the order learned.
    pub knowledge: BTreeMap<String, Vec<String>>,
    pub checks: Vec<Check>,
}

impl ScenarioReport {
    pub fn verdict(&self, handle: &str) -> Option<&str> {
        match &self.invocations.get(handle)?.status {
            InvocationStatus::Answered(v) => Some(v),
            _ => None,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn received_by<'a>(&'a self, actor: &'a str) -> impl Iterator<Item = &'a TranscriptEntry> + 'a {
        self.transcript.iter().filter(move |e| e.envelope.recipient == actor)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "backend\t{}", self.backend.header());
        let _ = writeln!(out, "seed\t{}", self.seed);
        let _ = writeln!(out, "messages\t{}", self.transcript.len());
        for (handle, inv) in &self.invocations {
            let outcome = match &inv.status {
                InvocationStatus::Pending => "(unanswered)",
                InvocationStatus::Skipped => "(skipped)",
                InvocationStatus::Answered(v) => v,
            };
            let _ = writeln!(
                out,
                "invocation\t{handle}\t{}\t{}\t{outcome}",
                inv.submitter, inv.responder
            );
        }
        for (actor, facts) in &self.knowledge {
            for fact in facts {
                let _ = writeln!(out, "knows\t{actor}\t{fact}");
            }
        }
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            let _ = writeln!(out, "check\t{}\t{status}\t{}", c.name, c.detail);
        }
        out
    }
}

struct Transport {
    dir: PathBuf,
    entries: Vec<TranscriptEntry>,
}

impl Transport {
    /// Writes the envelope to its file and returns what the recipient reads.
    fn deliver(&mut self, env: &MessageEnvelope) -> Result<MessageEnvelope> {
        let file = format!(
            "{:04}-{}-{}-to-{}.json",
            self.entries.len() + 1,
            env.kind.slug(),
            env.sender,
            env.recipient
        );
        let path = self.dir.join(&file);
        fs::write(&path, env.to_json())?;
        let json = fs::read_to_string(&path)?;
        let envelope = MessageEnvelope::from_json(&json)?;
        self.entries.push(TranscriptEntry {
            file,
            envelope: envelope.clone(),
            json,
        });
        Ok(envelope)
    }
}

struct Runner<'a> {
    script: &'a ScenarioScript,
    fed: Federation,
    rng: ChaCha20Rng,
    transport: Transport,
    invocations: BTreeMap<String, Invocation>,
    /// The query each responder received, by handle.
    received: BTreeMap<String, ComparisonQuery>,
    knowledge: BTreeMap<String, Vec<String>>,
}

impl Runner<'_> {
    fn learn(&mut self, actor: &str, fact: String) {
        self.knowledge.entry(actor.to_owned()).or_default().push(fact);
    }

    fn invocation(&self, handle: &str, actor: &str) -> Result<&Invocation> {
        let inv = self
            .invocations
            .get(handle)
            .ok_or_else(|| Error::Script(format!("unknown handle {handle:?}")))?;
        if inv.responder != actor {
            return Err(Error::Script(format!("{actor} is not the responder for {handle}")));
        }
        Ok(inv)
    }

    fn step(&mut self, step: &Step) -> Result<()> {
        let actor = step.actor.as_str();
        match &step.action {
            Action::Register { label } => {
                self.fed.register(label, &mut self.rng)?;
                self.learn(AUTHORITY, format!("registered {label}"));
            }
            Action::Keygen => self.fed.join(actor, &mut self.rng)?,
            Action::Enroll { label, payload } => self.enroll(actor, label, payload)?,
            Action::Query {
                handle,
                responder,
                slot,
                predicate,
            } => {
                let p = self.fed.participant(actor)?;
                let query = participant::build_query(&p.key, &p.db, *slot, predicate, &mut self.rng)?;
                self.send_query(handle, actor, responder, predicate, query)?;
            }
            Action::Scan { handle } => {
                self.scan(handle, actor)?;
            }
            Action::Forward {
                handle,
                new_handle,
                responder,
                predicate,
            } => {
                let scan = self.scan(handle, actor)?;
                self.invocations.get_mut(handle).expect("scanned handle exists").child = Some(new_handle.clone());
                match scan.and_then(|s| s.slot) {
                    Some(slot) => {
                        let p = self.fed.participant(actor)?;
                        let query = participant::build_query(&p.key, &p.db, slot, predicate, &mut self.rng)?;
                        self.send_query(new_handle, actor, responder, predicate, query)?;
                    }
                    None => {
                        self.invocations.insert(
                            new_handle.clone(),
                            Invocation {
                                submitter: actor.to_owned(),
                                responder: responder.clone(),
                                predicate: predicate.clone(),
                                query_id: None,
                                scan: None,
                                child: None,
                                status: InvocationStatus::Skipped,
                            },
                        );
                        self.learn(actor, format!("{new_handle}: not forwarded, no matching record"));
                    }
                }
            }
            Action::Respond { handle } => self.respond(handle, actor)?,
        }
        Ok(())
    }

    fn enroll(&mut self, actor: &str, label: &str, payload: &str) -> Result<()> {
        let backend = self.fed.backend();
        let p = self.fed.participant(actor)?;
        let slot = p.db.next_slot();
        let r = participant::blinding_scalar(backend, &mut self.rng);
        let (pending, request) =
            PendingEnrollment::begin(&p.key, slot, label, &p.key.derive_record_exponent(slot), &r)?;
        let id = participant::fresh_query_id(&mut self.rng);

        let env = MessageEnvelope::issuance_request(backend, &id, actor, AUTHORITY, &request)?;
        let at_ted = self.transport.deliver(&env)?;
        let response = self
            .fed
            .registry()
            .issue_raised(&at_ted.to_issuance_request(backend)?)?;
        let env = MessageEnvelope::issuance_response(backend, &at_ted.query_id, AUTHORITY, actor, &response)?;
        let at_party = self.transport.deliver(&env)?;

        let index = pending.complete(&at_party.to_issuance_response(backend)?)?;
        self.fed.record_enrollment(actor, label, index, payload)?;
        self.learn(AUTHORITY, format!("issued {label} to {actor}"));
        Ok(())
    }

    fn send_query(
        &mut self,
        handle: &str,
        submitter: &str,
        responder: &str,
        predicate: &str,
        query: ComparisonQuery,
    ) -> Result<()> {
        let env = MessageEnvelope::comparison_request(self.fed.backend(), submitter, responder, &query)?;
        let received = self.transport.deliver(&env)?;
        let query = received.to_query(self.fed.backend())?;
        self.invocations.insert(
            handle.to_owned(),
            Invocation {
                submitter: submitter.to_owned(),
                responder: responder.to_owned(),
                predicate: predicate.to_owned(),
                query_id: Some(query.id.clone()),
                scan: None,
                child: None,
                status: InvocationStatus::Pending,
            },
        );
        self.learn(responder, format!("{handle}: {submitter} asks {predicate:?}"));
        self.received.insert(handle.to_owned(), query);
        Ok(())
    }

    /// Scans once per handle; `None` for a skipped invocation.
    fn scan(&mut self, handle: &str, actor: &str) -> Result<Option<ScanOutcome>> {
        let inv = self.invocation(handle, actor)?;
        if inv.status == InvocationStatus::Skipped {
            return Ok(None);
        }
        if let Some(done) = inv.scan {
            return Ok(Some(done));
        }
        let p = self.fed.participant(actor)?;
        let outcome = participant::scan_for_match(&p.key, &p.db, &self.received[handle])?;
        self.invocations.get_mut(handle).expect("checked above").scan = Some(outcome);
        let fact = match outcome.slot {
            Some(slot) if outcome.duplicate => format!("{handle}: matched slot {slot} (warning: several rows match)"),
            Some(slot) => format!("{handle}: matched slot {slot}"),
            None => format!("{handle}: no matching record"),
        };
        self.learn(actor, fact);
        Ok(Some(outcome))
    }

    fn respond(&mut self, handle: &str, actor: &str) -> Result<()> {
        let Some(scan) = self.scan(handle, actor)? else {
            return Ok(());
        };
        let inv = &self.invocations[handle];
        if inv.status != InvocationStatus::Pending {
            return Err(Error::Script(format!("{handle} was already answered")));
        }
        let upstream = match inv.child.as_ref().map(|c| &self.invocations[c].status) {
            None | Some(InvocationStatus::Skipped) => None,
            Some(InvocationStatus::Answered(v)) => Some(v.as_str()),
            Some(InvocationStatus::Pending) => {
                return Err(Error::Script(format!("{handle} depends on an unanswered forward")));
            }
        };
        let p = self.fed.participant(actor)?;
        let payload = match scan.slot {
            Some(slot) => Some(p.db.row(slot)?.payload.as_str()),
            None => None,
        };
        let verdict = self.script.policy.apply(actor, &inv.predicate, payload, upstream);
        let query_id = inv.query_id.clone().expect("sent invocations carry an id");
        let submitter = inv.submitter.clone();

        let env = MessageEnvelope::comparison_response(&query_id, actor, &submitter, &verdict);
        let received = self.transport.deliver(&env)?;
        let verdict = received.verdict()?.to_owned();
        self.learn(&submitter, format!("{handle}: {actor} answers {verdict:?}"));
        self.invocations.get_mut(handle).expect("exists").status = InvocationStatus::Answered(verdict);
        Ok(())
    }

    fn checks(&self) -> Vec<Check> {
        let mut checks = Vec::new();
        let labels: Vec<&str> = self.fed.registry().labels().collect();
        for role in &self.script.roles {
            let mut forbidden: Vec<(&str, &str)> = labels.iter().map(|l| ("label", *l)).collect();
            for (owner, p) in self.fed.participants().filter(|(n, _)| *n != role) {
                forbidden.extend(p.payloads().map(|pl| (owner, pl)));
            }
            let mut leaks = BTreeSet::new();
            for entry in self.transport.entries.iter().filter(|e| e.envelope.recipient == *role) {
                for (whose, text) in &forbidden {
                    if entry.json.contains(text) {
                        leaks.insert(format!("{} contains {whose} text {text:?}", entry.file));
                    }
                }
            }
            checks.push(Check {
                name: format!("knowledge-boundary:{role}"),
                passed: leaks.is_empty(),
                detail: if leaks.is_empty() {
                    "received messages carry no labels or foreign payloads".into()
                } else {
                    leaks.into_iter().collect::<Vec<_>>().join("; ")
                },
            });
        }
        checks.push(completeness(&self.transport.entries));
        checks
    }
}

/// Every response's query id appears in exactly one earlier request of the
/// matching kind.
fn completeness(entries: &[TranscriptEntry]) -> Check {
    let mut problems = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        let env = &entry.envelope;
        let wanted = match env.kind {
            MessageKind::IssuanceResponse => MessageKind::IssuanceRequest,
            MessageKind::ComparisonResponse => MessageKind::ComparisonRequest,
            _ => continue,
        };
        let n = entries[..i]
            .iter()
            .filter(|e| e.envelope.kind == wanted && e.envelope.query_id == env.query_id)
            .count();
        if n != 1 {
            problems.push(format!("{} matches {n} requests", entry.file));
        }
    }
    Check {
        name: "transcript-completeness".into(),
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            "every response follows exactly one request".into()
        } else {
            problems.join("; ")
        },
    }
}

fn prepare_workdir(workdir: &Path) -> Result<PathBuf> {
    if workdir.exists() && fs::read_dir(workdir)?.next().is_some() {
        return Err(Error::Script(format!("workdir {} is not empty", workdir.display())));
    }
    let messages = workdir.join("messages");
    fs::create_dir_all(&messages)?;
    Ok(messages)
}

/// Runs every step in order, then writes `summary.txt` next to the
/// `messages/` directory. A failing step aborts with its 1-based index.
pub fn run_scenario(script: &ScenarioScript, backend: Backend, workdir: &Path, seed: u64) -> Result<ScenarioReport> {
    script.validate()?;
    let dir = prepare_workdir(workdir)?;
    let mut runner = Runner {
        script,
        fed: Federation::new(backend),
        rng: ChaCha20Rng::seed_from_u64(seed),
        transport: Transport {
            dir,
            entries: Vec::new(),
        },
        invocations: BTreeMap::new(),
        received: BTreeMap::new(),
        knowledge: script.roles.iter().map(|r| (r.clone(), Vec::new())).collect(),
    };
    for (idx, step) in script.steps.iter().enumerate() {
        runner.step(step).map_err(|cause| Error::Step {
            step: idx + 1,
            cause: Box::new(cause),
        })?;
    }
    let checks = runner.checks();
    let report = ScenarioReport {
        backend,
        seed,
        transcript: runner.transport.entries,
        invocations: runner.invocations,
        knowledge: runner.knowledge,
        checks,
    };
    fs::write(workdir.join("summary.txt"), report.summary())?;
    Ok(report)
}
