use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::config::GatewayConfig;
use super::decode::DecodeNote;

/// Prompts longer than this that come back faster than the configured floor
/// are flagged as possibly truncated.
pub const FAST_RESPONSE_PROMPT_CHARS: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    /// The server could not be reached or refused the request.
    #[error("inference server unavailable: {0}")]
    Unavailable(String),
    /// The server answered, but not with a usable generate response.
    #[error("inference server sent a malformed response: {0}")]
    BadResponse(String),
}

impl GatewayError {
    pub fn is_unavailable(&self) -> bool {
        matches!(self, GatewayError::Unavailable(_))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenerateRequest {
    pub system: String,
    pub prompt: String,
    pub json_mode: bool,
    /// Overrides the configured temperature.
    pub temperature: Option<f64>,
    /// Overrides the configured model.
    pub model: Option<String>,
}

impl GenerateRequest {
    pub fn new(system: impl Into<String>, prompt: impl Into<String>) -> Self {
        GenerateRequest {
            system: system.into(),
            prompt: prompt.into(),
            ..Default::default()
        }
    }

    pub fn json(mut self) -> Self {
        self.json_mode = true;
        self
    }

    pub fn temperature(mut self, t: f64) -> Self {
        self.temperature = Some(t);
        self
    }

    pub fn prompt_chars(&self) -> usize {
        self.system.chars().count() + self.prompt.chars().count()
    }
}

/// One completed request/response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmExchange {
    pub prompt_chars: usize,
    pub response_text: String,
    /// Seconds.
    pub elapsed: f64,
    pub decode_notes: Vec<DecodeNote>,
}

/// Anything that can answer a [`GenerateRequest`].
pub trait LanguageModel: Send + Sync {
    fn generate(&self, req: &GenerateRequest) -> Result<LlmExchange, GatewayError>;

    /// Cheap reachability probe.
    fn is_available(&self) -> bool;

    fn model_name(&self) -> &str;
}

/// True when a long prompt came back fast enough to suggest the server only
/// read part of it.
pub fn fast_response_suspect(elapsed: Duration, prompt_chars: usize, floor: Duration) -> bool {
    elapsed < floor && prompt_chars > FAST_RESPONSE_PROMPT_CHARS
}

/// Client for an Ollama-style `/api/generate` endpoint.
pub struct HttpGateway {
    config: GatewayConfig,
    agent: ureq::Agent,
    lanes: Lanes,
}

impl HttpGateway {
    pub fn new(config: GatewayConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.request_timeout).build();
        let lanes = Lanes::new(config.lanes.max(1));
        HttpGateway { config, agent, lanes }
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.config.base_url.trim_end_matches('/'), path)
    }

    fn body(&self, req: &GenerateRequest) -> Value {
        let mut body = json!({
            "model": req.model.as_deref().unwrap_or(&self.config.model),
            "prompt": req.prompt,
            "system": req.system,
            "stream": false,
            "options": {
                "num_ctx": self.config.context_tokens,
                "temperature": req.temperature.unwrap_or(self.config.temperature),
            },
        });
        if req.json_mode {
            body["format"] = json!("json");
        }
        body
    }

    fn post_once(&self, body: &Value) -> Result<Value, Attempt> {
        match self.agent.post(&self.url("/api/generate")).send_json(body) {
            Ok(resp) => resp
                .into_json::<Value>()
                .map_err(|e| Attempt::Fatal(GatewayError::BadResponse(e.to_string()))),
            Err(ureq::Error::Status(code, resp)) => {
                let detail = resp.into_string().unwrap_or_default();
                let err = GatewayError::Unavailable(format!("HTTP {code}: {}", detail.trim()));
                if code >= 500 {
                    Err(Attempt::Retry(err))
                } else {
                    Err(Attempt::Fatal(err))
                }
            }
            Err(ureq::Error::Transport(t)) => Err(Attempt::Retry(GatewayError::Unavailable(t.to_string()))),
        }
    }
}

enum Attempt {
    Retry(GatewayError),
    Fatal(GatewayError),
}

impl LanguageModel for HttpGateway {
    fn generate(&self, req: &GenerateRequest) -> Result<LlmExchange, GatewayError> {
        let _lane = self.lanes.acquire();
        let body = self.body(req);
        let mut last = GatewayError::Unavailable("no attempt made".into());
        for attempt in 0..=self.config.retry_count {
            let started = Instant::now();
            match self.post_once(&body) {
                Ok(v) => {
                    let elapsed = started.elapsed();
                    let text = v
                        .get("response")
                        .and_then(Value::as_str)
                        .ok_or_else(|| GatewayError::BadResponse("missing string field `response`".into()))?
                        .to_string();
                    let prompt_chars = req.prompt_chars();
                    let mut notes = Vec::new();
                    if fast_response_suspect(elapsed, prompt_chars, self.config.fast_response_floor) {
                        log::warn!(
                            "{} chars answered in {:.1}s; the prompt may have been truncated",
                            prompt_chars,
                            elapsed.as_secs_f64()
                        );
                        notes.push(DecodeNote::FastResponseWarning {
                            elapsed_s: elapsed.as_secs_f64(),
                            prompt_chars,
                        });
                    }
                    return Ok(LlmExchange {
                        prompt_chars,
                        response_text: text,
                        elapsed: elapsed.as_secs_f64(),
                        decode_notes: notes,
                    });
                }
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) => {
                    log::debug!("generate attempt {} failed: {e}", attempt + 1);
                    last = e;
                }
            }
        }
        Err(last)
    }

    fn is_available(&self) -> bool {
        self.agent
            .get(&self.url("/api/tags"))
            .timeout(Duration::from_secs(5))
            .call()
            .map(|r| r.status() == 200)
            .unwrap_or(false)
    }

    fn model_name(&self) -> &str {
        &self.config.model
    }
}

/// Counting semaphore bounding concurrent requests.
struct Lanes {
    free: Mutex<usize>,
    cv: Condvar,
}

struct LaneGuard<'a>(&'a Lanes);

impl Lanes {
    fn new(n: usize) -> Self {
        Lanes {
            free: Mutex::new(n),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> LaneGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        LaneGuard(self)
    }
}

impl Drop for LaneGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixty_seconds_on_a_long_prompt_is_healthy() {
        let floor = Duration::from_secs(5);
        assert!(!fast_response_suspect(Duration::from_secs(60), 52_000, floor));
    }

    #[test]
    fn two_seconds_on_a_13k_token_prompt_is_suspect() {
        let floor = Duration::from_secs(5);
        assert!(fast_response_suspect(Duration::from_secs(2), 13_000 * 4, floor));
        assert!(!fast_response_suspect(Duration::from_secs(2), 2_000, floor));
    }

    #[test]
    fn request_body_always_sets_num_ctx() {
        let gw = HttpGateway::new(GatewayConfig {
            context_tokens: 16_384,
            ..Default::default()
        });
        let body = gw.body(&GenerateRequest::new("sys", "hi").json().temperature(0.2));
        assert_eq!(body["options"]["num_ctx"], 16_384);
        assert_eq!(body["options"]["temperature"], 0.2);
        assert_eq!(body["format"], "json");
        assert_eq!(body["stream"], false);
        let plain = gw.body(&GenerateRequest::new("sys", "hi"));
        assert!(plain.get("format").is_none());
        assert_eq!(plain["options"]["num_ctx"], 16_384);
    }

    #[test]
    fn connection_refused_is_unavailable() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let port = listener.local_addr().unwrap().port();
        drop(listener);
        let gw = HttpGateway::new(GatewayConfig {
            base_url: format!("http://127.0.0.1:{port}"),
            retry_count: 2,
            ..Default::default()
        });
        let err = gw.generate(&GenerateRequest::new("s", "p")).unwrap_err();
        assert!(err.is_unavailable(), "{err}");
        assert!(!gw.is_available());
    }
}
