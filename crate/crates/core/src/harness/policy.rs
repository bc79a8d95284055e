//! Static response policy: responders answer the predicate from a fixed
//! table, never with raw record contents.

use crate::error::{Error, Result};

pub const NO_RECORD: &str = "no record";
pub const CANNOT_ANSWER: &str = "cannot answer";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyRule {
    pub role: String,
    pub predicate: String,
    pub payload: String,
    /// Verdict the responder itself received when it forwarded the question.
    pub upstream: Option<String>,
    pub verdict: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResponsePolicy {
    rules: Vec<PolicyRule>,
}

impl ResponsePolicy {
    pub fn new(rules: Vec<PolicyRule>) -> Self {
        ResponsePolicy { rules }
    }

    pub fn rules(&self) -> &[PolicyRule] {
        &self.rules
    }

    pub fn push(&mut self, rule: PolicyRule) {
        self.rules.push(rule);
    }

    pub fn apply(&self, role: &str, predicate: &str, payload: Option<&str>, upstream: Option<&str>) -> String {
        let Some(payload) = payload else {
            return NO_RECORD.to_owned();
        };
        self.rules
            .iter()
            .find(|r| {
                r.role == role && r.predicate == predicate && r.payload == payload && r.upstream.as_deref() == upstream
            })
            .map_or_else(|| CANNOT_ANSWER.to_owned(), |r| r.verdict.clone())
    }

    /// Parses the fields after `policy`:
    /// `role<TAB>predicate<TAB>payload<TAB>upstream-or-"-"<TAB>verdict`.
    pub fn parse_rule(fields: &[&str], line_no: usize) -> Result<PolicyRule> {
        let [role, predicate, payload, upstream, verdict] = fields else {
            return Err(Error::parse(
                line_no,
                "policy needs role, predicate, payload, upstream and verdict",
            ));
        };
        Ok(PolicyRule {
            role: (*role).to_owned(),
            predicate: (*predicate).to_owned(),
            payload: (*payload).to_owned(),
            upstream: (*upstream != "-").then(|| (*upstream).to_owned()),
            verdict: (*verdict).to_owned(),
        })
    }

    /// One `policy<TAB>...` line per rule.
    pub fn to_text(&self) -> String {
        self.rules
            .iter()
            .map(|r| {
                format!(
                    "policy\t{}\t{}\t{}\t{}\t{}\n",
                    r.role,
                    r.predicate,
                    r.payload,
                    r.upstream.as_deref().unwrap_or("-"),
                    r.verdict
                )
            })
            .collect()
    }

    /// Reads `policy` lines, ignoring blank lines and `#` comments.
    pub fn from_text(input: &str) -> Result<Self> {
        let mut policy = ResponsePolicy::default();
        for (idx, line) in input.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields[0] != "policy" {
                return Err(Error::parse(idx + 1, "expected a policy line"));
            }
            policy.push(Self::parse_rule(&fields[1..], idx + 1)?);
        }
        Ok(policy)
    }
}

/// Maps a matched payload (or none) and a predicate to a verdict.
pub fn apply_response_policy(
    policy: &ResponsePolicy,
    role: &str,
    predicate: &str,
    payload: Option<&str>,
    upstream: Option<&str>,
) -> String {
    policy.apply(role, predicate, payload, upstream)
}
