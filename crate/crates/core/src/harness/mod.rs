//! Multi-party scenarios over file-based message exchange.

pub mod envelope;
pub mod federation;
pub mod policy;
pub mod scenario;
pub mod script;

pub use envelope::{MessageEnvelope, MessageKind, MultiKeyQueryFile};
pub use federation::{Federation, Participant};
pub use policy::{apply_response_policy, PolicyRule, ResponsePolicy, CANNOT_ANSWER, NO_RECORD};
pub use scenario::{run_scenario, Check, Invocation, InvocationStatus, ScenarioReport, TranscriptEntry};
pub use script::{Action, ScenarioScript, Step, AUTHORITY};
