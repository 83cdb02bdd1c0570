use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ENV_LLM_URL: &str = "LECTERN_LLM_URL";
pub const ENV_LLM_MODEL: &str = "LECTERN_LLM_MODEL";

/// Context window sent with every request unless configured otherwise.
/// Lecture transcripts run to roughly 13k tokens.
pub const DEFAULT_CONTEXT_TOKENS: u32 = 16_384;
/// Analyses refuse to run with a smaller window than this.
pub const MIN_ANALYSIS_CONTEXT_TOKENS: u32 = 4_096;

pub const SYNTHESIS_TEMPERATURE: f64 = 0.6;
pub const ANALYSIS_TEMPERATURE: f64 = 0.2;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("base_url {0:?} must start with http:// or https://")]
    BadUrl(String),
    #[error("model name must be non-empty")]
    EmptyModel,
    #[error("context_tokens must be positive")]
    ZeroContext,
    #[error("temperature {0} outside [0, 2]")]
    Temperature(f64),
    #[error("context_tokens {0} is below the {MIN_ANALYSIS_CONTEXT_TOKENS} minimum for analyses")]
    ContextTooSmall(u32),
    #[error("lanes must be at least 1")]
    ZeroLanes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GatewayConfig {
    pub base_url: String,
    pub model: String,
    pub context_tokens: u32,
    pub temperature: f64,
    #[serde(with = "secs")]
    pub request_timeout: Duration,
    pub retry_count: u32,
    /// Answers faster than this on a long prompt get a warning note.
    #[serde(with = "secs")]
    pub fast_response_floor: Duration,
    /// Concurrent requests allowed against the server.
    pub lanes: usize,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            base_url: "http://localhost:11434".into(),
            model: "llama3.1:8b".into(),
            context_tokens: DEFAULT_CONTEXT_TOKENS,
            temperature: SYNTHESIS_TEMPERATURE,
            request_timeout: Duration::from_secs(300),
            retry_count: 1,
            fast_response_floor: Duration::from_secs(5),
            lanes: 1,
        }
    }
}

impl GatewayConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(ConfigError::BadUrl(self.base_url.clone()));
        }
        if self.model.trim().is_empty() {
            return Err(ConfigError::EmptyModel);
        }
        if self.context_tokens == 0 {
            return Err(ConfigError::ZeroContext);
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(ConfigError::Temperature(self.temperature));
        }
        if self.lanes == 0 {
            return Err(ConfigError::ZeroLanes);
        }
        Ok(())
    }

    /// Extra check for long-input analysis calls.
    pub fn validate_for_analysis(&self) -> Result<(), ConfigError> {
        self.validate()?;
        if self.context_tokens < MIN_ANALYSIS_CONTEXT_TOKENS {
            return Err(ConfigError::ContextTooSmall(self.context_tokens));
        }
        Ok(())
    }

    /// Applies `LECTERN_LLM_URL` / `LECTERN_LLM_MODEL` when set.
    pub fn apply_env(&mut self) {
        self.apply_overrides(std::env::var(ENV_LLM_URL).ok(), std::env::var(ENV_LLM_MODEL).ok());
    }

    pub fn apply_overrides(&mut self, url: Option<String>, model: Option<String>) {
        if let Some(u) = url.filter(|u| !u.trim().is_empty()) {
            self.base_url = u.trim().trim_end_matches('/').to_string();
        }
        if let Some(m) = model.filter(|m| !m.trim().is_empty()) {
            self.model = m.trim().to_string();
        }
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}
