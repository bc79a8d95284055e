//! One JSON object per message file, fields in a fixed order, group
//! elements as side-tagged hex.

use serde::{Deserialize, Serialize};

use crate::authority::{IssuanceRequest, IssuanceResponse};
use crate::bilinear::{Backend, Side};
use crate::error::{Error, Result};
use crate::multikey::MultiKeyQuery;
use crate::participant::ComparisonQuery;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MessageKind {
    IssuanceRequest,
    IssuanceResponse,
    ComparisonRequest,
    ComparisonResponse,
}

impl MessageKind {
    pub fn slug(self) -> &'static str {
        match self {
            MessageKind::IssuanceRequest => "issuance-request",
            MessageKind::IssuanceResponse => "issuance-response",
            MessageKind::ComparisonRequest => "comparison-request",
            MessageKind::ComparisonResponse => "comparison-response",
        }
    }

    pub fn is_request(self) -> bool {
        matches!(self, MessageKind::IssuanceRequest | MessageKind::ComparisonRequest)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssuanceRequestBody {
    pub label: String,
    pub base_a: String,
    pub base_b: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssuanceResponseBody {
    pub element_a: String,
    pub element_b: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonRequestBody {
    pub u1: String,
    pub u2: String,
    pub predicate: String,
}

/// Only the verdict: no elements and nothing about the responder's rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonResponseBody {
    pub verdict: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Body {
    IssuanceRequest(IssuanceRequestBody),
    IssuanceResponse(IssuanceResponseBody),
    ComparisonRequest(ComparisonRequestBody),
    ComparisonResponse(ComparisonResponseBody),
}

impl Body {
    fn kind(&self) -> MessageKind {
        match self {
            Body::IssuanceRequest(_) => MessageKind::IssuanceRequest,
            Body::IssuanceResponse(_) => MessageKind::IssuanceResponse,
            Body::ComparisonRequest(_) => MessageKind::ComparisonRequest,
            Body::ComparisonResponse(_) => MessageKind::ComparisonResponse,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MessageEnvelope {
    pub kind: MessageKind,
    pub query_id: String,
    pub sender: String,
    pub recipient: String,
    pub body: Body,
}

impl MessageEnvelope {
    fn new(query_id: &str, sender: &str, recipient: &str, body: Body) -> Self {
        MessageEnvelope {
            kind: body.kind(),
            query_id: query_id.to_owned(),
            sender: sender.to_owned(),
            recipient: recipient.to_owned(),
            body,
        }
    }

    pub fn issuance_request(
        backend: Backend,
        query_id: &str,
        sender: &str,
        recipient: &str,
        request: &IssuanceRequest,
    ) -> Result<Self> {
        let body = IssuanceRequestBody {
            label: request.label.clone(),
            base_a: backend.encode_element(&request.base_a)?,
            base_b: backend.encode_element(&request.base_b)?,
        };
        Ok(Self::new(query_id, sender, recipient, Body::IssuanceRequest(body)))
    }

    pub fn issuance_response(
        backend: Backend,
        query_id: &str,
        sender: &str,
        recipient: &str,
        response: &IssuanceResponse,
    ) -> Result<Self> {
        let body = IssuanceResponseBody {
            element_a: backend.encode_element(&response.element_a)?,
            element_b: backend.encode_element(&response.element_b)?,
        };
        Ok(Self::new(query_id, sender, recipient, Body::IssuanceResponse(body)))
    }

    pub fn comparison_request(
        backend: Backend,
        sender: &str,
        recipient: &str,
        query: &ComparisonQuery,
    ) -> Result<Self> {
        let body = ComparisonRequestBody {
            u1: backend.encode_element(&query.u1)?,
            u2: backend.encode_element(&query.u2)?,
            predicate: query.predicate.clone(),
        };
        Ok(Self::new(&query.id, sender, recipient, Body::ComparisonRequest(body)))
    }

    pub fn comparison_response(query_id: &str, sender: &str, recipient: &str, verdict: &str) -> Self {
        let body = ComparisonResponseBody {
            verdict: verdict.to_owned(),
        };
        Self::new(query_id, sender, recipient, Body::ComparisonResponse(body))
    }

    pub fn to_issuance_request(&self, backend: Backend) -> Result<IssuanceRequest> {
        match &self.body {
            Body::IssuanceRequest(b) => Ok(IssuanceRequest {
                label: b.label.clone(),
                base_a: backend.decode_element_on(Side::SourceA, &b.base_a)?,
                base_b: backend.decode_element_on(Side::SourceB, &b.base_b)?,
            }),
            _ => Err(self.unexpected(MessageKind::IssuanceRequest)),
        }
    }

    pub fn to_issuance_response(&self, backend: Backend) -> Result<IssuanceResponse> {
        match &self.body {
            Body::IssuanceResponse(b) => Ok(IssuanceResponse {
                element_a: backend.decode_element_on(Side::SourceA, &b.element_a)?,
                element_b: backend.decode_element_on(Side::SourceB, &b.element_b)?,
            }),
            _ => Err(self.unexpected(MessageKind::IssuanceResponse)),
        }
    }

    pub fn to_query(&self, backend: Backend) -> Result<ComparisonQuery> {
        match &self.body {
            Body::ComparisonRequest(b) => Ok(ComparisonQuery {
                id: self.query_id.clone(),
                u1: backend.decode_element_on(Side::SourceA, &b.u1)?,
                u2: backend.decode_element_on(Side::SourceA, &b.u2)?,
                predicate: b.predicate.clone(),
            }),
            _ => Err(self.unexpected(MessageKind::ComparisonRequest)),
        }
    }

    pub fn verdict(&self) -> Result<&str> {
        match &self.body {
            Body::ComparisonResponse(b) => Ok(&b.verdict),
            _ => Err(self.unexpected(MessageKind::ComparisonResponse)),
        }
    }

    fn unexpected(&self, wanted: MessageKind) -> Error {
        Error::Message(format!("expected {wanted:?}, got {:?}", self.kind))
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelopes always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: MessageEnvelope = serde_json::from_str(text)?;
        if env.body.kind() != env.kind {
            return Err(Error::Message(format!(
                "kind {:?} does not match a {:?} body",
                env.kind,
                env.body.kind()
            )));
        }
        Ok(env)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryPart {
    pub u1: String,
    pub u2: String,
}

/// File form of a multi-key query: one element pair per dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiKeyQueryFile {
    pub query_id: String,
    pub predicate: String,
    pub parts: Vec<QueryPart>,
}

impl MultiKeyQueryFile {
    pub fn from_query(backend: Backend, query: &MultiKeyQuery) -> Result<Self> {
        let parts = query
            .parts
            .iter()
            .map(|p| {
                Ok(QueryPart {
                    u1: backend.encode_element(&p.u1)?,
                    u2: backend.encode_element(&p.u2)?,
                })
            })
            .collect::<Result<_>>()?;
        let predicate = query.parts.first().map(|p| p.predicate.clone()).unwrap_or_default();
        Ok(MultiKeyQueryFile {
            query_id: query.id.clone(),
            predicate,
            parts,
        })
    }

    pub fn to_query(&self, backend: Backend) -> Result<MultiKeyQuery> {
        let parts = self
            .parts
            .iter()
            .enumerate()
            .map(|(k, p)| {
                Ok(ComparisonQuery {
                    id: format!("{}.{}", self.query_id, k + 1),
                    u1: backend.decode_element_on(Side::SourceA, &p.u1)?,
                    u2: backend.decode_element_on(Side::SourceA, &p.u2)?,
                    predicate: self.predicate.clone(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(MultiKeyQuery {
            id: self.query_id.clone(),
            parts,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("query files always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
