//! Mock upstreams speaking the same JSON protocol as the live endpoints,
//! either in process ([`MockTransport`]) or over HTTP ([`MockServer`]).

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use serde_json::{json, Value};

use crate::config::EndpointConfig;
use crate::error::{HarnessError, Result};
use crate::gateway::{Transport, TransportFailure, CHAT_PATH, EMBEDDINGS_PATH, NLI_PATH};

/// An error reply the mock should send instead of a result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockFault {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NliTriple {
    pub entailment: f64,
    pub contradiction: f64,
    pub neutral: f64,
}

pub const MOCK_EMBEDDING_DIM: usize = 32;

/// Deterministic bag-of-words embedding: each lowercase word adds 1 to a hashed bucket.
pub fn hashed_embedding(text: &str, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for word in text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
    {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in word.to_lowercase().bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
        v[(h % dim as u64) as usize] += 1.0;
    }
    if v.iter().all(|x| *x == 0.0) {
        v[0] = 1.0;
    }
    v
}

/// Scripted model behavior behind the mock transport and server.
pub trait MockBehavior: Send + Sync {
    fn chat(&self, model: &str, system: Option<&str>, user: &str) -> std::result::Result<String, MockFault>;

    fn embed(&self, _model: &str, text: &str) -> std::result::Result<Vec<f64>, MockFault> {
        Ok(hashed_embedding(text, MOCK_EMBEDDING_DIM))
    }

    fn nli(&self, _premise: &str, _hypothesis: &str) -> std::result::Result<NliTriple, MockFault> {
        Ok(NliTriple {
            entailment: 1.0 / 3.0,
            contradiction: 1.0 / 3.0,
            neutral: 1.0 / 3.0,
        })
    }
}

/// Always replies with the same text.
pub struct EchoModel(pub String);

impl MockBehavior for EchoModel {
    fn chat(&self, _: &str, _: Option<&str>, _: &str) -> std::result::Result<String, MockFault> {
        Ok(self.0.clone())
    }
}

/// Fails the first `failures` calls with `status`, then defers to `inner`.
pub struct Flaky<B> {
    pub inner: B,
    pub status: u16,
    remaining: AtomicUsize,
}

impl<B> Flaky<B> {
    pub fn new(inner: B, failures: usize, status: u16) -> Self {
        Flaky {
            inner,
            status,
            remaining: AtomicUsize::new(failures),
        }
    }

    fn trip(&self) -> std::result::Result<(), MockFault> {
        let before = self
            .remaining
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1));
        match before {
            Ok(_) => Err(MockFault {
                status: self.status,
                body: "{\"error\":\"injected failure\"}".into(),
            }),
            Err(_) => Ok(()),
        }
    }
}

impl<B: MockBehavior> MockBehavior for Flaky<B> {
    fn chat(&self, model: &str, system: Option<&str>, user: &str) -> std::result::Result<String, MockFault> {
        self.trip()?;
        self.inner.chat(model, system, user)
    }

    fn embed(&self, model: &str, text: &str) -> std::result::Result<Vec<f64>, MockFault> {
        self.trip()?;
        self.inner.embed(model, text)
    }

    fn nli(&self, premise: &str, hypothesis: &str) -> std::result::Result<NliTriple, MockFault> {
        self.trip()?;
        self.inner.nli(premise, hypothesis)
    }
}

fn bad_request(msg: &str) -> (u16, Value) {
    (400, json!({"error": msg}))
}

/// Serves one request body for `path` and returns (status, JSON reply).
pub fn dispatch(behavior: &dyn MockBehavior, path: &str, body: &Value) -> (u16, Value) {
    let fault = |f: MockFault| {
        let body = serde_json::from_str(&f.body).unwrap_or(Value::String(f.body));
        (f.status, body)
    };
    match path {
        CHAT_PATH => {
            let Some(model) = body.get("model").and_then(Value::as_str) else {
                return bad_request("missing model");
            };
            let Some(messages) = body.get("messages").and_then(Value::as_array) else {
                return bad_request("missing messages");
            };
            let mut system = None;
            let mut user = None;
            for m in messages {
                let content = m.get("content").and_then(Value::as_str);
                match m.get("role").and_then(Value::as_str) {
                    Some("system") => system = content,
                    Some("user") => user = content,
                    _ => return bad_request("unsupported message role"),
                }
            }
            let Some(user) = user else {
                return bad_request("missing user message");
            };
            match behavior.chat(model, system, user) {
                Ok(text) => (
                    200,
                    json!({
                        "object": "chat.completion",
                        "model": model,
                        "choices": [{"index": 0, "message": {"role": "assistant", "content": text}, "finish_reason": "stop"}],
                    }),
                ),
                Err(f) => fault(f),
            }
        }
        EMBEDDINGS_PATH => {
            let (Some(model), Some(input)) = (
                body.get("model").and_then(Value::as_str),
                body.get("input").and_then(Value::as_str),
            ) else {
                return bad_request("embeddings need model and input");
            };
            match behavior.embed(model, input) {
                Ok(v) => (200, json!({"object": "list", "data": [{"index": 0, "embedding": v}], "model": model})),
                Err(f) => fault(f),
            }
        }
        NLI_PATH => {
            let (Some(p), Some(h)) = (
                body.get("premise").and_then(Value::as_str),
                body.get("hypothesis").and_then(Value::as_str),
            ) else {
                return bad_request("NLI needs premise and hypothesis");
            };
            match behavior.nli(p, h) {
                Ok(t) => (
                    200,
                    json!({"entailment": t.entailment, "contradiction": t.contradiction, "neutral": t.neutral}),
                ),
                Err(f) => fault(f),
            }
        }
        _ => (404, json!({"error": format!("no route {path}")})),
    }
}

/// In-process transport: requests are serialized and dispatched exactly as the
/// mock server would, without sockets.
pub struct MockTransport {
    behavior: Arc<dyn MockBehavior>,
    calls: AtomicUsize,
}

impl MockTransport {
    pub fn new(behavior: Arc<dyn MockBehavior>) -> Self {
        MockTransport {
            behavior,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for MockTransport {
    fn post_json(&self, _cfg: &EndpointConfig, path: &str, body: &Value) -> std::result::Result<Value, TransportFailure> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        // Round-trip through text so the mock sees only what a server would.
        let wire: Value = serde_json::from_str(&body.to_string()).expect("valid JSON");
        let (status, reply) = dispatch(self.behavior.as_ref(), path, &wire);
        if (200..300).contains(&status) {
            Ok(reply)
        } else {
            Err(TransportFailure::Status {
                status,
                body: reply.to_string(),
            })
        }
    }

    fn is_live(&self) -> bool {
        false
    }
}

/// HTTP server on 127.0.0.1 serving all three endpoint protocols.
pub struct MockServer {
    server: Arc<tiny_http::Server>,
    port: u16,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(behavior: Arc<dyn MockBehavior>) -> Result<MockServer> {
        Self::start_on("127.0.0.1:0", behavior)
    }

    pub fn start_on(addr: &str, behavior: Arc<dyn MockBehavior>) -> Result<MockServer> {
        let server = tiny_http::Server::http(addr)
            .map_err(|e| HarnessError::Transport(format!("cannot bind mock server on {addr}: {e}")))?;
        let port = server
            .server_addr()
            .to_ip()
            .map(|a| a.port())
            .ok_or_else(|| HarnessError::Transport("mock server has no IP address".into()))?;
        let server = Arc::new(server);
        let worker = Arc::clone(&server);
        let handle = std::thread::spawn(move || {
            while let Ok(mut request) = worker.recv() {
                let mut text = String::new();
                let (status, reply) = match request.as_reader().read_to_string(&mut text) {
                    Err(e) => bad_request(&format!("unreadable body: {e}")),
                    Ok(_) => match serde_json::from_str::<Value>(&text) {
                        Err(e) => bad_request(&format!("invalid JSON: {e}")),
                        Ok(body) if *request.method() == tiny_http::Method::Post => {
                            dispatch(behavior.as_ref(), request.url(), &body)
                        }
                        Ok(_) => (405, json!({"error": "POST only"})),
                    },
                };
                let header = tiny_http::Header::from_bytes("Content-Type", "application/json").expect("static header");
                let response = tiny_http::Response::from_string(reply.to_string())
                    .with_status_code(status)
                    .with_header(header);
                if let Err(e) = request.respond(response) {
                    log::warn!("mock server failed to respond: {e}");
                }
            }
        });
        Ok(MockServer {
            server,
            port,
            handle: Some(handle),
        })
    }

    pub fn port(&self) -> u16 {
        self.port
    }

    pub fn base_url(&self) -> String {
        format!("http://127.0.0.1:{}", self.port)
    }

    /// Serves until the process is interrupted.
    pub fn wait(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

/// Prints every request instead of sending it and answers with a neutral
/// placeholder ("Sometimes. 3"), so experiments run through without network.
#[derive(Default)]
pub struct DryRunTransport {
    printed: Mutex<()>,
}

impl Transport for DryRunTransport {
    fn post_json(&self, cfg: &EndpointConfig, path: &str, body: &Value) -> std::result::Result<Value, TransportFailure> {
        let _guard = self.printed.lock().expect("print lock");
        println!("--- {} {}{}", cfg.model_id, cfg.base_url, path);
        match path {
            CHAT_PATH => {
                for m in body["messages"].as_array().into_iter().flatten() {
                    println!("[{}]\n{}", m["role"].as_str().unwrap_or("?"), m["content"].as_str().unwrap_or(""));
                }
                Ok(json!({"choices": [{"message": {"role": "assistant", "content": "Sometimes. 3"}}]}))
            }
            EMBEDDINGS_PATH => {
                let text = body["input"].as_str().unwrap_or("");
                println!("[input]\n{text}");
                Ok(json!({"data": [{"embedding": hashed_embedding(text, MOCK_EMBEDDING_DIM)}]}))
            }
            _ => {
                println!("[premise]\n{}\n[hypothesis]\n{}", body["premise"].as_str().unwrap_or(""), body["hypothesis"].as_str().unwrap_or(""));
                Ok(json!({"entailment": 0.2, "contradiction": 0.4, "neutral": 0.4}))
            }
        }
    }

    fn is_live(&self) -> bool {
        false
    }
}
