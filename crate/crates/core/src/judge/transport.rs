use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{Dimension, JudgeKind, JudgeMode};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("no recorded response for {0}")]
    Missing(String),
    #[error("recorded prompt for {0} differs from the rendered prompt")]
    PromptMismatch(String),
    #[error("replay file line {line}: {message}")]
    BadRecord { line: usize, message: String },
    #[error("{0}")]
    Failed(String),
}

/// One prompt addressed to a judge model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeRequest {
    pub instance_id: String,
    pub dimension: Dimension,
    pub kind: JudgeKind,
    pub mode: JudgeMode,
    pub prompt: String,
}

impl JudgeRequest {
    /// `id/dimension/kind/mode`, the lookup key of recorded responses.
    pub fn key(&self) -> String {
        format!("{}/{}/{}/{}", self.instance_id, self.dimension.as_str(), self.kind.as_str(), self.mode.as_str())
    }
}

/// Sends prompts to a model and returns its raw answer.
pub trait Transport: Send + Sync {
    fn model_id(&self) -> &str;
    fn send(&self, request: &JudgeRequest) -> Result<String, TransportError>;
}

/// A recorded exchange. `error` replays a failed call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayRecord {
    pub key: String,
    #[serde(default)]
    pub response: Option<String>,
    #[serde(default)]
    pub error: Option<String>,
    /// When present, the rendered prompt must match it exactly.
    #[serde(default)]
    pub request: Option<String>,
}

/// Answers from a file of recorded exchanges, one JSON object per line.
#[derive(Debug, Clone, Default)]
pub struct ReplayTransport {
    model: String,
    records: HashMap<String, ReplayRecord>,
}

impl ReplayTransport {
    pub fn new(model: impl Into<String>, records: impl IntoIterator<Item = ReplayRecord>) -> Self {
        ReplayTransport { model: model.into(), records: records.into_iter().map(|r| (r.key.clone(), r)).collect() }
    }

    pub fn from_jsonl(model: impl Into<String>, reader: impl BufRead) -> Result<Self, TransportError> {
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| TransportError::BadRecord { line: i + 1, message: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ReplayRecord = serde_json::from_str(&line)
                .map_err(|e| TransportError::BadRecord { line: i + 1, message: e.to_string() })?;
            records.push(record);
        }
        Ok(ReplayTransport::new(model, records))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl Transport for ReplayTransport {
    fn model_id(&self) -> &str {
        &self.model
    }

    fn send(&self, request: &JudgeRequest) -> Result<String, TransportError> {
        let key = request.key();
        let record = self.records.get(&key).ok_or_else(|| TransportError::Missing(key.clone()))?;
        if record.request.as_ref().is_some_and(|p| *p != request.prompt) {
            return Err(TransportError::PromptMismatch(key));
        }
        if let Some(err) = &record.error {
            return Err(TransportError::Failed(err.clone()));
        }
        record.response.clone().ok_or(TransportError::Missing(key))
    }
}
