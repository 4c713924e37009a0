//! Judge transport for OpenAI-compatible chat completion endpoints.

use std::time::Duration;

use fixeval::judge::{JudgeRequest, JudgeSettings, Transport, TransportError};
use serde_json::{json, Value};

pub struct ChatTransport {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    api_key: String,
}

impl ChatTransport {
    /// Reads the API key from the environment variable named in `settings`.
    pub fn from_settings(settings: &JudgeSettings) -> Result<Self, String> {
        let api_key = std::env::var(&settings.api_key_env)
            .map_err(|_| format!("environment variable {} is not set", settings.api_key_env))?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(settings.timeout_secs)))
            .build()
            .into();
        Ok(ChatTransport { agent, endpoint: settings.endpoint.clone(), model: settings.model.clone(), api_key })
    }
}

impl Transport for ChatTransport {
    fn model_id(&self) -> &str {
        &self.model
    }

    fn send(&self, request: &JudgeRequest) -> Result<String, TransportError> {
        let body = json!({
            "model": self.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": request.prompt}],
        });
        let failed = |e: ureq::Error| TransportError::Failed(format!("{}: {e}", request.key()));
        let reply: Value = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(&body)
            .map_err(failed)?
            .body_mut()
            .read_json()
            .map_err(failed)?;
        reply["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| TransportError::Failed(format!("{}: reply has no message content", request.key())))
    }
}
