//! Chat, embedding and NLI calls over a swappable transport, with retries and
//! request-hash caching against the run store.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::config::EndpointConfig;
use crate::error::{HarnessError, Result};
use crate::store::{
    content_hash, unix_millis, ChatExchange, EmbeddingRecord, NliRecord, NliScores, RecordBody,
    RunStore,
};

pub const CHAT_PATH: &str = "/v1/chat/completions";
pub const EMBEDDINGS_PATH: &str = "/v1/embeddings";
pub const NLI_PATH: &str = "/nli";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportFailure {
    Network(String),
    Status { status: u16, body: String },
}

impl TransportFailure {
    fn retryable(&self) -> bool {
        match self {
            TransportFailure::Network(_) => true,
            TransportFailure::Status { status, .. } => *status == 429 || *status >= 500,
        }
    }
}

/// Sends one JSON POST and returns the parsed JSON reply.
pub trait Transport: Send + Sync {
    fn post_json(&self, cfg: &EndpointConfig, path: &str, body: &Value) -> std::result::Result<Value, TransportFailure>;

    /// Live transports need API keys; mocks do not.
    fn is_live(&self) -> bool;
}

/// HTTP(S) transport. Adds `Authorization: Bearer` when the endpoint names a key variable.
pub struct LiveTransport;

impl Transport for LiveTransport {
    fn post_json(&self, cfg: &EndpointConfig, path: &str, body: &Value) -> std::result::Result<Value, TransportFailure> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        let url = format!("{}{}", cfg.base_url.trim_end_matches('/'), path);
        let mut request = agent.post(&url);
        if let Ok(Some(key)) = cfg.resolve_api_key() {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = request
            .send_json(body)
            .map_err(|e| TransportFailure::Network(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportFailure::Network(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(TransportFailure::Status { status, body: text });
        }
        serde_json::from_str(&text).map_err(|e| TransportFailure::Status {
            status,
            body: format!("invalid JSON ({e}): {text}"),
        })
    }

    fn is_live(&self) -> bool {
        true
    }
}

/// Where gateway calls are recorded: a store plus the run that owns new records.
#[derive(Clone)]
pub struct Recorder {
    pub store: Arc<RunStore>,
    pub run_id: String,
}

pub struct Gateway {
    transport: Arc<dyn Transport>,
    recorder: Option<Recorder>,
    cache: bool,
    transport_calls: AtomicUsize,
    dims: Mutex<HashMap<String, usize>>,
}

fn chat_hash(cfg: &EndpointConfig, system: Option<&str>, user: &str) -> String {
    content_hash(&json!({
        "kind": "chat",
        "base_url": cfg.base_url,
        "model": cfg.model_id,
        "system": system,
        "user": user,
        "temperature": cfg.temperature,
    }))
}

fn embed_hash(cfg: &EndpointConfig, text: &str) -> String {
    content_hash(&json!({"kind": "embedding", "base_url": cfg.base_url, "model": cfg.model_id, "input": text}))
}

fn nli_hash(cfg: &EndpointConfig, premise: &str, hypothesis: &str) -> String {
    content_hash(&json!({
        "kind": "nli",
        "base_url": cfg.base_url,
        "model": cfg.model_id,
        "premise": premise,
        "hypothesis": hypothesis,
    }))
}

impl Gateway {
    pub fn new(transport: Arc<dyn Transport>) -> Self {
        Gateway {
            transport,
            recorder: None,
            cache: false,
            transport_calls: AtomicUsize::new(0),
            dims: Mutex::new(HashMap::new()),
        }
    }

    /// Records every exchange in `run_id` and serves repeats from the store.
    pub fn with_store(mut self, store: Arc<RunStore>, run_id: String) -> Self {
        self.recorder = Some(Recorder { store, run_id });
        self.cache = true;
        self
    }

    pub fn without_cache(mut self) -> Self {
        self.cache = false;
        self
    }

    pub fn recorder(&self) -> Option<&Recorder> {
        self.recorder.as_ref()
    }

    /// Requests actually handed to the transport (cache hits excluded).
    pub fn transport_calls(&self) -> usize {
        self.transport_calls.load(Ordering::SeqCst)
    }

    pub fn is_live(&self) -> bool {
        self.transport.is_live()
    }

    fn cached(&self, hash: &str) -> Result<Option<RecordBody>> {
        let Some(rec) = self.recorder.as_ref().filter(|_| self.cache) else {
            return Ok(None);
        };
        let Some(hit) = rec.store.lookup_cached(hash) else {
            return Ok(None);
        };
        // Make the run's own log self-contained for replay.
        if !rec.store.run_has(&rec.run_id, hash) {
            rec.store.append_record(&rec.run_id, hash, hit.body.clone())?;
        }
        Ok(Some(hit.body))
    }

    fn persist(&self, hash: &str, body: RecordBody) -> Result<()> {
        if let Some(rec) = &self.recorder {
            rec.store.append_record(&rec.run_id, hash, body)?;
        }
        Ok(())
    }

    fn call(&self, cfg: &EndpointConfig, path: &str, body: &Value) -> Result<Value> {
        if self.transport.is_live() {
            cfg.resolve_api_key()?;
        }
        let mut attempt = 0u32;
        loop {
            self.transport_calls.fetch_add(1, Ordering::SeqCst);
            match self.transport.post_json(cfg, path, body) {
                Ok(v) => return Ok(v),
                Err(f) if f.retryable() && attempt < cfg.max_retries => {
                    let base = cfg.retry_backoff_ms.saturating_mul(1 << attempt.min(16));
                    let delay = base + fastrand::u64(0..=base / 2);
                    log::warn!(
                        "{} {path} attempt {} failed ({f:?}); retrying in {delay} ms",
                        cfg.model_id,
                        attempt + 1
                    );
                    std::thread::sleep(Duration::from_millis(delay));
                    attempt += 1;
                }
                Err(TransportFailure::Network(msg)) => {
                    return Err(HarnessError::Transport(format!(
                        "{} {path} failed after {} attempts: {msg}",
                        cfg.model_id,
                        attempt + 1
                    )))
                }
                Err(TransportFailure::Status { status, body }) => {
                    return Err(HarnessError::Upstream { status, body })
                }
            }
        }
    }

    /// One stateless chat request: optional system message plus one user message.
    pub fn chat_complete(&self, cfg: &EndpointConfig, system: Option<&str>, user: &str) -> Result<ChatExchange> {
        if user.trim().is_empty() {
            return Err(HarnessError::Precondition("user text must not be empty".into()));
        }
        let system = system.filter(|s| !s.is_empty());
        let hash = chat_hash(cfg, system, user);
        if let Some(RecordBody::Chat(x)) = self.cached(&hash)? {
            return Ok(x);
        }
        let mut messages = Vec::new();
        if let Some(s) = system {
            messages.push(json!({"role": "system", "content": s}));
        }
        messages.push(json!({"role": "user", "content": user}));
        let body = json!({"model": cfg.model_id, "messages": messages, "temperature": cfg.temperature});
        let started = Instant::now();
        let reply = self.call(cfg, CHAT_PATH, &body)?;
        let text = reply
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| HarnessError::Protocol(format!("chat reply without choices[0].message.content: {reply}")))?;
        let exchange = ChatExchange {
            system_text: system.map(str::to_string),
            user_text: user.to_string(),
            response_text: text.to_string(),
            model_id: cfg.model_id.clone(),
            base_url: cfg.base_url.clone(),
            temperature: cfg.temperature,
            request_hash: hash.clone(),
            timestamp_ms: unix_millis(),
            latency_ms: started.elapsed().as_millis() as u64,
        };
        self.persist(&hash, RecordBody::Chat(exchange.clone()))?;
        Ok(exchange)
    }

    fn check_dimension(&self, model: &str, dim: usize) -> Result<()> {
        let mut dims = self.dims.lock().expect("dimension lock");
        match dims.get(model) {
            Some(&expected) if expected != dim => Err(HarnessError::Dimension {
                model: model.to_string(),
                expected,
                got: dim,
            }),
            Some(_) => Ok(()),
            None => {
                dims.insert(model.to_string(), dim);
                Ok(())
            }
        }
    }

    pub fn embed(&self, cfg: &EndpointConfig, text: &str) -> Result<Vec<f64>> {
        if text.trim().is_empty() {
            return Err(HarnessError::Precondition("embedding input must not be empty".into()));
        }
        let hash = embed_hash(cfg, text);
        if let Some(RecordBody::Embedding(e)) = self.cached(&hash)? {
            self.check_dimension(&cfg.model_id, e.vector.len())?;
            return Ok(e.vector);
        }
        let reply = self.call(cfg, EMBEDDINGS_PATH, &json!({"model": cfg.model_id, "input": text}))?;
        let vector: Vec<f64> = reply
            .pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .and_then(|a| a.iter().map(Value::as_f64).collect())
            .ok_or_else(|| HarnessError::Protocol(format!("embedding reply without data[0].embedding: {reply}")))?;
        if vector.is_empty() {
            return Err(HarnessError::Protocol("empty embedding".into()));
        }
        self.check_dimension(&cfg.model_id, vector.len())?;
        self.persist(
            &hash,
            RecordBody::Embedding(EmbeddingRecord {
                model_id: cfg.model_id.clone(),
                base_url: cfg.base_url.clone(),
                text: text.to_string(),
                vector: vector.clone(),
            }),
        )?;
        Ok(vector)
    }

    /// Scores one premise/hypothesis pair; candidate labels are never batched.
    pub fn nli_score(&self, cfg: &EndpointConfig, premise: &str, hypothesis: &str) -> Result<NliScores> {
        if premise.trim().is_empty() || hypothesis.trim().is_empty() {
            return Err(HarnessError::Precondition("premise and hypothesis must not be empty".into()));
        }
        let hash = nli_hash(cfg, premise, hypothesis);
        if let Some(RecordBody::Nli(n)) = self.cached(&hash)? {
            return Ok(n.scores);
        }
        let reply = self.call(cfg, NLI_PATH, &json!({"premise": premise, "hypothesis": hypothesis}))?;
        let field = |name: &str| {
            reply
                .get(name)
                .and_then(Value::as_f64)
                .ok_or_else(|| HarnessError::Protocol(format!("NLI reply without {name}: {reply}")))
        };
        let (entailment, contradiction, neutral) = (field("entailment")?, field("contradiction")?, field("neutral")?);
        let in_unit = [entailment, contradiction, neutral].iter().all(|p| (0.0..=1.0).contains(p));
        let scores = NliScores {
            entailment,
            contradiction,
            neutral,
            normalized: in_unit && ((entailment + contradiction + neutral) - 1.0).abs() <= 1e-6,
        };
        self.persist(
            &hash,
            RecordBody::Nli(NliRecord {
                model_id: cfg.model_id.clone(),
                base_url: cfg.base_url.clone(),
                premise: premise.to_string(),
                hypothesis: hypothesis.to_string(),
                scores,
            }),
        )?;
        Ok(scores)
    }
}
