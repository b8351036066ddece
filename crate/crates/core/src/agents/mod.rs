//! Agent policies behind one step interface: scripted oracles, a planted
//! parameter-sensitive agent, a random baseline, and two prompting agents
//! over a text-completion backend.

pub mod backend;
pub mod m3a;
pub mod oracle;
pub mod random;
pub mod seeact;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use backend::{BackendError, ModelBackend, ScriptedBackend};
pub use m3a::{M3aAgent, M3aConfig};
pub use oracle::{OracleAgent, PlantedAgent};
pub use random::RandomAgent;
pub use seeact::SeeActAgent;

use crate::screens::{AgentAction, Observation, TransitionResult};
use crate::tasks::TaskInstance;

/// One decision of a policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyStep {
    pub action: AgentAction,
    pub reason: String,
    pub summary: Option<String>,
}

impl PolicyStep {
    pub fn new(action: AgentAction, reason: impl Into<String>) -> Self {
        PolicyStep {
            action,
            reason: reason.into(),
            summary: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub step_index: usize,
    pub summary: String,
}

/// A policy driven by the harness: `begin` once per episode, then `step`
/// and `after_step` alternately.
pub trait Agent: Send {
    fn name(&self) -> String;

    fn begin(&mut self, instance: &TaskInstance);

    fn step(&mut self, observation: &Observation, step_index: usize) -> PolicyStep;

    /// `after` is `None` once the episode has ended.
    fn after_step(
        &mut self,
        _before: &Observation,
        _after: Option<&Observation>,
        _step: &PolicyStep,
        _result: &TransitionResult,
    ) {
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Oracle,
    Planted,
    Random,
    M3a,
    M3aSimple,
    Seeact,
}

impl AgentKind {
    pub const ALL: [AgentKind; 6] = [
        AgentKind::Oracle,
        AgentKind::Planted,
        AgentKind::Random,
        AgentKind::M3a,
        AgentKind::M3aSimple,
        AgentKind::Seeact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Oracle => "oracle",
            AgentKind::Planted => "planted",
            AgentKind::Random => "random",
            AgentKind::M3a => "m3a",
            AgentKind::M3aSimple => "m3a_simple",
            AgentKind::Seeact => "seeact",
        }
    }

    pub fn needs_backend(self) -> bool {
        matches!(self, AgentKind::M3a | AgentKind::M3aSimple | AgentKind::Seeact)
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim().to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| format!("unknown agent {s:?}"))
    }
}

/// Builds a fresh agent per episode, so suites can run episodes in parallel.
pub type AgentFactory = Arc<dyn Fn() -> Box<dyn Agent> + Send + Sync>;

/// Factory for `kind`. Prompting agents need a backend; without one they
/// get a [`ScriptedBackend`] that always returns its fallback.
pub fn factory(kind: AgentKind, backend: Option<Arc<dyn ModelBackend>>) -> AgentFactory {
    let backend = backend.unwrap_or_else(|| Arc::new(ScriptedBackend::empty()));
    match kind {
        AgentKind::Oracle => Arc::new(|| Box::new(OracleAgent::new())),
        AgentKind::Planted => Arc::new(|| Box::new(PlantedAgent::new())),
        AgentKind::Random => Arc::new(|| Box::new(RandomAgent::new(0))),
        AgentKind::M3a => Arc::new(move || Box::new(M3aAgent::new(backend.clone(), M3aConfig::default()))),
        AgentKind::M3aSimple => Arc::new(move || Box::new(M3aAgent::new(backend.clone(), M3aConfig::simple()))),
        AgentKind::Seeact => Arc::new(move || Box::new(SeeActAgent::new(backend.clone()))),
    }
}
