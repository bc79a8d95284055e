//! Scenario scripts: tab-separated lines. A preamble of `role <name>` and
//! `policy ...` lines, a lone `steps` line, then one `actor action args...`
//! step per line. Blank lines and `#` comments are ignored. Actions:
//! `register <label>` (authority only), `keygen`, `enroll <label> <payload>`,
//! `query <handle> <responder> <slot> <predicate>`, `scan <handle>`,
//! `forward <handle> <new-handle> <responder> <predicate>`, `respond <handle>`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::policy::ResponsePolicy;

pub const AUTHORITY: &str = "ted";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Register {
        label: String,
    },
    Keygen,
    Enroll {
        label: String,
        payload: String,
    },
    /// Send a comparison request for one of the actor's own slots.
    Query {
        handle: String,
        responder: String,
        slot: usize,
        predicate: String,
    },
    Scan {
        handle: String,
    },
    /// Ask a further responder about the record matched for `handle`.
    Forward {
        handle: String,
        new_handle: String,
        responder: String,
        predicate: String,
    },
    Respond {
        handle: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub line: usize,
    pub actor: String,
    pub action: Action,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let actor = &self.actor;
        match &self.action {
            Action::Register { label } => write!(f, "{actor}\tregister\t{label}"),
            Action::Keygen => write!(f, "{actor}\tkeygen"),
            Action::Enroll { label, payload } => write!(f, "{actor}\tenroll\t{label}\t{payload}"),
            Action::Query {
                handle,
                responder,
                slot,
                predicate,
            } => write!(f, "{actor}\tquery\t{handle}\t{responder}\t{slot}\t{predicate}"),
            Action::Scan { handle } => write!(f, "{actor}\tscan\t{handle}"),
            Action::Forward {
                handle,
                new_handle,
                responder,
                predicate,
            } => write!(f, "{actor}\tforward\t{handle}\t{new_handle}\t{responder}\t{predicate}"),
            Action::Respond { handle } => write!(f, "{actor}\trespond\t{handle}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScenarioScript {
    pub roles: Vec<String>,
    pub policy: ResponsePolicy,
    pub steps: Vec<Step>,
}

impl ScenarioScript {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for role in &self.roles {
            out.push_str(&format!("role\t{role}\n"));
        }
        out.push_str(&self.policy.to_text());
        out.push_str("steps\n");
        for step in &self.steps {
            out.push_str(&step.to_string());
            out.push('\n');
        }
        out
    }

    /// Checks roles, actors and query handles.
    pub fn validate(&self) -> Result<()> {
        let mut roles = HashSet::new();
        for role in &self.roles {
            if role == AUTHORITY || role.is_empty() || !roles.insert(role.as_str()) {
                return Err(Error::Script(format!("invalid or duplicate role {role:?}")));
            }
        }
        let mut handles = HashSet::new();
        for step in &self.steps {
            let fail = |msg: String| Error::parse(step.line, msg);
            let is_authority_action = matches!(step.action, Action::Register { .. });
            if is_authority_action != (step.actor == AUTHORITY) {
                return Err(fail(format!("{} cannot perform this action", step.actor)));
            }
            if !is_authority_action && !roles.contains(step.actor.as_str()) {
                return Err(fail(format!("undeclared actor {:?}", step.actor)));
            }
            let check_responder = |responder: &String| {
                if !roles.contains(responder.as_str()) || *responder == step.actor {
                    return Err(fail(format!("invalid responder {responder:?}")));
                }
                Ok(())
            };
            match &step.action {
                Action::Query { handle, responder, .. } => {
                    check_responder(responder)?;
                    if !handles.insert(handle.clone()) {
                        return Err(fail(format!("handle {handle:?} reused")));
                    }
                }
                Action::Forward {
                    handle,
                    new_handle,
                    responder,
                    ..
                } => {
                    check_responder(responder)?;
                    if !handles.contains(handle) {
                        return Err(fail(format!("unknown handle {handle:?}")));
                    }
                    if !handles.insert(new_handle.clone()) {
                        return Err(fail(format!("handle {new_handle:?} reused")));
                    }
                }
                Action::Scan { handle } | Action::Respond { handle } => {
                    if !handles.contains(handle) {
                        return Err(fail(format!("unknown handle {handle:?}")));
                    }
                }
                Action::Register { .. } | Action::Keygen | Action::Enroll { .. } => {}
            }
        }
        Ok(())
    }
}

fn parse_step(fields: &[&str], line: usize) -> Result<Step> {
    let wrong = || Error::parse(line, format!("malformed step {:?}", fields.join(" ")));
    let s = |x: &str| x.to_owned();
    let (actor, verb, args) = match fields {
        [actor, verb, args @ ..] => (*actor, *verb, args),
        _ => return Err(wrong()),
    };
    let action = match (verb, args) {
        ("register", [label]) => Action::Register { label: s(label) },
        ("keygen", []) => Action::Keygen,
        ("enroll", [label, payload]) => Action::Enroll {
            label: s(label),
            payload: s(payload),
        },
        ("query", [handle, responder, slot, predicate]) => Action::Query {
            handle: s(handle),
            responder: s(responder),
            slot: slot
                .parse()
                .map_err(|_| Error::parse(line, format!("bad slot {slot:?}")))?,
            predicate: s(predicate),
        },
        ("scan", [handle]) => Action::Scan { handle: s(handle) },
        ("forward", [handle, new_handle, responder, predicate]) => Action::Forward {
            handle: s(handle),
            new_handle: s(new_handle),
            responder: s(responder),
            predicate: s(predicate),
        },
        ("respond", [handle]) => Action::Respond { handle: s(handle) },
        _ => return Err(wrong()),
    };
    Ok(Step {
        line,
        actor: s(actor),
        action,
    })
}

impl FromStr for ScenarioScript {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let mut script = ScenarioScript::default();
        let mut in_steps = false;
        for (idx, line) in input.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if in_steps {
                script.steps.push(parse_step(&fields, line_no)?);
                continue;
            }
            match fields[..] {
                ["steps"] => in_steps = true,
                ["role", name] => script.roles.push(name.to_owned()),
                ["policy", ..] => script.policy.push(ResponsePolicy::parse_rule(&fields[1..], line_no)?),
                _ => return Err(Error::parse(line_no, format!("unexpected preamble line {line:?}"))),
            }
        }
        if !in_steps {
            return Err(Error::Script("missing `steps` section".into()));
        }
        script.validate()?;
        Ok(script)
    }
}
