//! Text-completion backends.
//!
//! Only a scripted stub lives here: replies are looked up by the SHA-256 of
//! the prompt, so transcripts can be checked in and replayed offline.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("backend error: {0}")]
pub struct BackendError(pub String);

pub trait ModelBackend: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, BackendError>;
}

pub fn prompt_sha256(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// One line of a transcript. `error` set means the call fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptEntry {
    pub prompt_sha256: String,
    #[serde(default)]
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transcript {
    pub fallback: String,
    pub entries: Vec<TranscriptEntry>,
}

/// Replays a [`Transcript`]; unmatched prompts get the fallback reply.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    fallback: String,
    replies: HashMap<String, Result<String, String>>,
}

/// Fallback used when nothing else is configured: a parseable no-op.
pub const DEFAULT_FALLBACK: &str = "Reason: no scripted reply\nAction: {\"action_type\":\"wait\"}";

impl ScriptedBackend {
    pub fn empty() -> Self {
        ScriptedBackend {
            fallback: DEFAULT_FALLBACK.to_string(),
            replies: HashMap::new(),
        }
    }

    pub fn with_fallback(fallback: impl Into<String>) -> Self {
        ScriptedBackend {
            fallback: fallback.into(),
            replies: HashMap::new(),
        }
    }

    pub fn from_transcript(t: &Transcript) -> Self {
        let replies = t
            .entries
            .iter()
            .map(|e| {
                let reply = match &e.error {
                    Some(err) => Err(err.clone()),
                    None => Ok(e.response.clone()),
                };
                (e.prompt_sha256.clone(), reply)
            })
            .collect();
        ScriptedBackend {
            fallback: t.fallback.clone(),
            replies,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        Ok(Self::from_transcript(&serde_json::from_str(text)?))
    }

    /// Reply to exactly this prompt.
    pub fn insert(&mut self, prompt: &str, response: impl Into<String>) {
        self.replies.insert(prompt_sha256(prompt), Ok(response.into()));
    }

    /// Make exactly this prompt fail.
    pub fn insert_error(&mut self, prompt: &str, message: impl Into<String>) {
        self.replies.insert(prompt_sha256(prompt), Err(message.into()));
    }
}

impl ModelBackend for ScriptedBackend {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        match self.replies.get(&prompt_sha256(prompt)) {
            Some(Ok(r)) => Ok(r.clone()),
            Some(Err(e)) => Err(BackendError(e.clone())),
            None => Ok(self.fallback.clone()),
        }
    }
}

/// Wraps a backend and records every exchange as a transcript entry.
pub struct RecordingBackend<B> {
    inner: B,
    log: Mutex<Vec<TranscriptEntry>>,
}

impl<B: ModelBackend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        RecordingBackend {
            inner,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn entries(&self) -> Vec<TranscriptEntry> {
        self.log.lock().expect("recording lock").clone()
    }
}

impl<B: ModelBackend> ModelBackend for RecordingBackend<B> {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let out = self.inner.complete(prompt);
        let entry = TranscriptEntry {
            prompt_sha256: prompt_sha256(prompt),
            response: out.as_ref().cloned().unwrap_or_default(),
            error: out.as_ref().err().map(|e| e.0.clone()),
        };
        self.log.lock().expect("recording lock").push(entry);
        out
    }
}

/// Any `Fn(&str) -> String` is a backend that never fails.
impl<F> ModelBackend for F
where
    F: Fn(&str) -> String + Send + Sync,
{
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        Ok(self(prompt))
    }
}
