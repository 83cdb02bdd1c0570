//! Canned-response stand-ins for the inference server.
//!
//! [`MockServer`] speaks the same HTTP surface as the real server
//! (`POST /api/generate`, `GET /api/tags`) on a local port and records every
//! request it receives. [`ScriptedModel`] is the in-process equivalent for
//! code that takes a [`LanguageModel`] directly. Both answer from a
//! [`Script`]: a list of rules that pick a reply by substring match on the
//! system prompt and prompt.

use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Instant;

use serde_json::{json, Value};

use crate::llm::{GatewayError, GenerateRequest, LanguageModel, LlmExchange};

struct Rule {
    needle: String,
    replies: Vec<String>,
    served: Mutex<usize>,
}

/// Ordered reply rules. The first rule whose needle occurs in the system
/// prompt or prompt answers; a rule with several replies serves them in order
/// and then repeats the last one.
#[derive(Default)]
pub struct Script {
    rules: Vec<Rule>,
}

impl Script {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn on(self, needle: &str, reply: impl Into<String>) -> Self {
        self.on_seq(needle, vec![reply.into()])
    }

    pub fn on_seq(mut self, needle: &str, replies: Vec<String>) -> Self {
        assert!(!replies.is_empty(), "a rule needs at least one reply");
        self.rules.push(Rule {
            needle: needle.into(),
            replies,
            served: Mutex::new(0),
        });
        self
    }

    /// A rule that matches every request.
    pub fn otherwise(self, reply: impl Into<String>) -> Self {
        self.on("", reply)
    }

    pub fn reply_for(&self, system: &str, prompt: &str) -> Option<String> {
        let rule = self
            .rules
            .iter()
            .find(|r| system.contains(&r.needle) || prompt.contains(&r.needle))?;
        let mut served = rule.served.lock().unwrap_or_else(|e| e.into_inner());
        let reply = rule.replies[(*served).min(rule.replies.len() - 1)].clone();
        *served += 1;
        Some(reply)
    }
}

/// In-process [`LanguageModel`] answering from a [`Script`].
pub struct ScriptedModel {
    script: Script,
    requests: Mutex<Vec<GenerateRequest>>,
    available: bool,
}

impl ScriptedModel {
    pub fn new(script: Script) -> Self {
        ScriptedModel {
            script,
            requests: Mutex::new(Vec::new()),
            available: true,
        }
    }

    /// A model whose every call fails as unreachable.
    pub fn unavailable() -> Self {
        ScriptedModel {
            available: false,
            ..Self::new(Script::new())
        }
    }

    pub fn requests(&self) -> Vec<GenerateRequest> {
        self.requests.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn call_count(&self) -> usize {
        self.requests.lock().unwrap_or_else(|e| e.into_inner()).len()
    }
}

impl LanguageModel for ScriptedModel {
    fn generate(&self, req: &GenerateRequest) -> Result<LlmExchange, GatewayError> {
        self.requests
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push(req.clone());
        if !self.available {
            return Err(GatewayError::Unavailable("scripted model is offline".into()));
        }
        let text = self
            .script
            .reply_for(&req.system, &req.prompt)
            .ok_or_else(|| GatewayError::BadResponse("no scripted reply matches".into()))?;
        Ok(LlmExchange {
            prompt_chars: req.prompt_chars(),
            response_text: text,
            elapsed: 0.0,
            decode_notes: Vec::new(),
        })
    }

    fn is_available(&self) -> bool {
        self.available
    }

    fn model_name(&self) -> &str {
        "scripted"
    }
}

/// A request received by [`MockServer`].
#[derive(Debug, Clone)]
pub struct CapturedRequest {
    pub method: String,
    pub path: String,
    pub body: Value,
}

impl CapturedRequest {
    pub fn system(&self) -> &str {
        self.body.get("system").and_then(Value::as_str).unwrap_or_default()
    }

    pub fn prompt(&self) -> &str {
        self.body.get("prompt").and_then(Value::as_str).unwrap_or_default()
    }

    pub fn num_ctx(&self) -> Option<u64> {
        self.body.pointer("/options/num_ctx").and_then(Value::as_u64)
    }

    pub fn temperature(&self) -> Option<f64> {
        self.body.pointer("/options/temperature").and_then(Value::as_f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MockReply {
    pub status: u16,
    pub body: String,
}

impl MockReply {
    /// A well-formed generate response carrying `text`.
    pub fn generate(text: &str) -> Self {
        MockReply {
            status: 200,
            body: json!({"model": "mock", "response": text, "done": true}).to_string(),
        }
    }

    pub fn status(status: u16) -> Self {
        MockReply {
            status,
            body: json!({"error": "mock failure"}).to_string(),
        }
    }
}

type Handler = dyn Fn(&CapturedRequest) -> MockReply + Send + Sync;

/// Local HTTP server imitating the inference endpoint.
pub struct MockServer {
    url: String,
    server: Arc<tiny_http::Server>,
    requests: Arc<Mutex<Vec<CapturedRequest>>>,
    thread: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Serves `script` on an ephemeral port. Unmatched generate requests get
    /// HTTP 500.
    pub fn start(script: Script) -> Self {
        Self::with_handler(move |req| match script.reply_for(req.system(), req.prompt()) {
            Some(text) => MockReply::generate(&text),
            None => MockReply::status(500),
        })
    }

    /// Serves generate requests through `handler`. `GET /api/tags` always
    /// answers 200.
    pub fn with_handler(handler: impl Fn(&CapturedRequest) -> MockReply + Send + Sync + 'static) -> Self {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").expect("bind mock server"));
        let port = server.server_addr().to_ip().expect("tcp listener").port();
        let requests = Arc::new(Mutex::new(Vec::new()));
        let handler: Arc<Handler> = Arc::new(handler);
        let thread = {
            let server = Arc::clone(&server);
            let requests = Arc::clone(&requests);
            std::thread::spawn(move || serve(&server, &requests, &*handler))
        };
        MockServer {
            url: format!("http://127.0.0.1:{port}"),
            server,
            requests,
            thread: Some(thread),
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    /// Generate requests received so far, in arrival order.
    pub fn requests(&self) -> Vec<CapturedRequest> {
        self.requests
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .iter()
            .filter(|r| r.path == "/api/generate")
            .cloned()
            .collect()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn serve(server: &tiny_http::Server, log: &Mutex<Vec<CapturedRequest>>, handler: &Handler) {
    for mut request in server.incoming_requests() {
        let started = Instant::now();
        let mut raw = String::new();
        let _ = request.as_reader().read_to_string(&mut raw);
        let captured = CapturedRequest {
            method: request.method().as_str().to_uppercase(),
            path: request.url().split('?').next().unwrap_or_default().to_string(),
            body: serde_json::from_str(&raw).unwrap_or(Value::Null),
        };
        let reply = match (captured.method.as_str(), captured.path.as_str()) {
            ("GET", "/api/tags") => MockReply {
                status: 200,
                body: json!({"models": [{"name": "mock"}]}).to_string(),
            },
            ("POST", "/api/generate") => handler(&captured),
            _ => MockReply::status(404),
        };
        log.lock().unwrap_or_else(|e| e.into_inner()).push(captured);
        let header = tiny_http::Header::from_bytes("Content-Type", "application/json").expect("static header");
        let response = tiny_http::Response::from_string(reply.body)
            .with_status_code(reply.status)
            .with_header(header);
        let _ = request.respond(response);
        log::trace!("mock served in {:?}", started.elapsed());
    }
}
