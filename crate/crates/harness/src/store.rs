//! Append-only run store: `{root}/{run_id}/manifest.json`, `records.jsonl`, `reports/`.
//!
//! Records are one JSON object per line. Every record carries the run id and a
//! SHA-256 request hash; the earliest record for a hash serves as the cache
//! entry for all later runs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use traitlens_core::rater::RatingRecord;

use crate::config::EndpointConfig;
use crate::error::{HarnessError, Result};

pub const RECORD_SCHEMA: &str = "traitlens.record.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_text: Option<String>,
    pub user_text: String,
    pub response_text: String,
    pub model_id: String,
    pub base_url: String,
    pub temperature: f64,
    pub request_hash: String,
    /// Milliseconds since the Unix epoch when the response arrived.
    pub timestamp_ms: u64,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub model_id: String,
    pub base_url: String,
    pub text: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NliScores {
    pub entailment: f64,
    pub contradiction: f64,
    pub neutral: f64,
    /// The three values form a probability distribution (within 1e-6).
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NliRecord {
    pub model_id: String,
    pub base_url: String,
    pub premise: String,
    pub hypothesis: String,
    pub scores: NliScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub name: String,
    pub value: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum RecordBody {
    Chat(ChatExchange),
    Embedding(EmbeddingRecord),
    Nli(NliRecord),
    Rating(RatingRecord),
    Stats(StatsRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecord {
    pub schema: String,
    pub run_id: String,
    pub request_hash: String,
    #[serde(flatten)]
    pub body: RecordBody,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
    /// Stopped on an error; records written so far stay valid and a rerun picks them up from the cache.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub experiment: String,
    pub endpoints: Vec<EndpointConfig>,
    pub item_set: String,
    pub variants: Vec<String>,
    pub started_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<u64>,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Set when a temperature other than 0 was requested explicitly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_override: Option<f64>,
    pub determinism: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(run_id: String, experiment: &str, endpoints: Vec<EndpointConfig>) -> Self {
        RunManifest {
            run_id,
            experiment: experiment.to_string(),
            endpoints,
            item_set: "full-44".into(),
            variants: Vec::new(),
            started_at: unix_secs(),
            finished_at: None,
            status: RunStatus::Running,
            error: None,
            temperature_override: None,
            determinism: "temperature 0 unless overridden; no sampling seeds; responses cached by request hash".into(),
            parameters: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuarantinedLine {
    pub run_id: String,
    pub line_number: usize,
    pub content: String,
    pub reason: String,
}

pub fn unix_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn unix_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Hex SHA-256 of the canonical (key-sorted) JSON encoding of `value`.
pub fn content_hash(value: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(value).expect("JSON values always serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

struct Inner {
    index: HashMap<String, StoredRecord>,
    manifests: BTreeMap<String, RunManifest>,
    run_hashes: HashMap<String, HashSet<String>>,
    writers: HashMap<String, File>,
    quarantined: Vec<QuarantinedLine>,
}

pub struct RunStore {
    root: PathBuf,
    inner: Mutex<Inner>,
}

fn store_err(context: &str, path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Store(format!("{context} {}: {e}", path.display()))
}

/// Reads a record log. Lines that do not parse are returned separately.
fn read_log(run_id: &str, path: &Path) -> Result<(Vec<StoredRecord>, Vec<QuarantinedLine>)> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Vec::new(), Vec::new())),
        Err(e) => return Err(store_err("cannot open", path, e)),
    };
    let mut records = Vec::new();
    let mut bad = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| store_err("cannot read", path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<StoredRecord>(&line) {
            Ok(r) if r.schema == RECORD_SCHEMA => records.push(r),
            Ok(r) => bad.push(QuarantinedLine {
                run_id: run_id.to_string(),
                line_number: n + 1,
                content: line,
                reason: format!("unknown schema {:?}", r.schema),
            }),
            Err(e) => bad.push(QuarantinedLine {
                run_id: run_id.to_string(),
                line_number: n + 1,
                content: line,
                reason: e.to_string(),
            }),
        }
    }
    Ok((records, bad))
}

impl RunStore {
    /// Opens or creates a store and replays every run log into the cache index.
    pub fn open(root: impl AsRef<Path>) -> Result<RunStore> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|e| store_err("cannot create store at", &root, e))?;
        let probe = root.join(".write-probe");
        File::create(&probe).map_err(|e| store_err("store is not writable:", &root, e))?;
        let _ = fs::remove_file(&probe);

        let mut manifests = BTreeMap::new();
        let entries = fs::read_dir(&root).map_err(|e| store_err("cannot list", &root, e))?;
        for entry in entries.flatten() {
            let path = entry.path().join("manifest.json");
            if let Ok(text) = fs::read_to_string(&path) {
                match serde_json::from_str::<RunManifest>(&text) {
                    Ok(m) => {
                        manifests.insert(m.run_id.clone(), m);
                    }
                    Err(e) => log::warn!("skipping unreadable manifest {}: {e}", path.display()),
                }
            }
        }
        let mut order: Vec<&RunManifest> = manifests.values().collect();
        order.sort_by(|a, b| a.started_at.cmp(&b.started_at).then(a.run_id.cmp(&b.run_id)));

        let mut index = HashMap::new();
        let mut run_hashes: HashMap<String, HashSet<String>> = HashMap::new();
        let mut quarantined = Vec::new();
        for m in order {
            let (records, bad) = read_log(&m.run_id, &root.join(&m.run_id).join("records.jsonl"))?;
            for q in &bad {
                log::warn!(
                    "quarantined line {} of run {}: {}",
                    q.line_number,
                    q.run_id,
                    q.reason
                );
            }
            quarantined.extend(bad);
            for r in records {
                run_hashes.entry(r.run_id.clone()).or_default().insert(r.request_hash.clone());
                index.entry(r.request_hash.clone()).or_insert(r);
            }
        }
        Ok(RunStore {
            root,
            inner: Mutex::new(Inner {
                index,
                manifests,
                run_hashes,
                writers: HashMap::new(),
                quarantined,
            }),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn run_dir(&self, run_id: &str) -> PathBuf {
        self.root.join(run_id)
    }

    pub fn reports_dir(&self, run_id: &str) -> PathBuf {
        self.run_dir(run_id).join("reports")
    }

    /// A fresh run id of the form `{experiment}-{unix seconds}-{n}`.
    pub fn new_run_id(&self, experiment: &str) -> String {
        let inner = self.inner.lock().expect("store lock");
        let stamp = unix_secs();
        (1..)
            .map(|n| format!("{experiment}-{stamp}-{n}"))
            .find(|id| !inner.manifests.contains_key(id) && !self.root.join(id).exists())
            .expect("unbounded search")
    }

    pub fn create_run(&self, manifest: &RunManifest) -> Result<()> {
        {
            let inner = self.inner.lock().expect("store lock");
            if inner.manifests.contains_key(&manifest.run_id) {
                return Err(HarnessError::Store(format!("run {} already exists", manifest.run_id)));
            }
        }
        let dir = self.run_dir(&manifest.run_id);
        fs::create_dir_all(dir.join("reports")).map_err(|e| store_err("cannot create", &dir, e))?;
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join("records.jsonl"))
            .map_err(|e| store_err("cannot create log in", &dir, e))?;
        self.write_manifest(manifest)
    }

    /// Manifests are run metadata and may be rewritten (status, end time); records may not.
    pub fn write_manifest(&self, manifest: &RunManifest) -> Result<()> {
        let path = self.run_dir(&manifest.run_id).join("manifest.json");
        let text = serde_json::to_string_pretty(manifest).expect("plain data");
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, text + "\n").map_err(|e| store_err("cannot write", &tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| store_err("cannot replace", &path, e))?;
        self.inner
            .lock()
            .expect("store lock")
            .manifests
            .insert(manifest.run_id.clone(), manifest.clone());
        Ok(())
    }

    pub fn manifest(&self, run_id: &str) -> Option<RunManifest> {
        self.inner.lock().expect("store lock").manifests.get(run_id).cloned()
    }

    pub fn runs(&self) -> Vec<RunManifest> {
        self.inner.lock().expect("store lock").manifests.values().cloned().collect()
    }

    /// Appends one record as a single line and flushes it.
    pub fn append_record(&self, run_id: &str, request_hash: &str, body: RecordBody) -> Result<StoredRecord> {
        let record = StoredRecord {
            schema: RECORD_SCHEMA.to_string(),
            run_id: run_id.to_string(),
            request_hash: request_hash.to_string(),
            body,
        };
        let mut line = serde_json::to_string(&record).expect("plain data");
        line.push('\n');
        let mut inner = self.inner.lock().expect("store lock");
        if !inner.manifests.contains_key(run_id) {
            return Err(HarnessError::Store(format!("unknown run {run_id}")));
        }
        if !inner.writers.contains_key(run_id) {
            let path = self.run_dir(run_id).join("records.jsonl");
            let mut file = OpenOptions::new()
                .create(true)
                .read(true)
                .append(true)
                .open(&path)
                .map_err(|e| store_err("cannot open", &path, e))?;
            // A crash can leave a partial last line; start on a fresh line so it stays isolated.
            let len = file.metadata().map_err(|e| store_err("cannot stat", &path, e))?.len();
            if len > 0 {
                let mut last = [0u8; 1];
                file.seek(SeekFrom::Start(len - 1))
                    .and_then(|_| file.read_exact(&mut last))
                    .map_err(|e| store_err("cannot read", &path, e))?;
                if last[0] != b'\n' {
                    file.write_all(b"\n").map_err(|e| store_err("cannot repair", &path, e))?;
                }
            }
            inner.writers.insert(run_id.to_string(), file);
        }
        let file = inner.writers.get_mut(run_id).expect("just inserted");
        file.write_all(line.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| HarnessError::Store(format!("cannot append to run {run_id}: {e}")))?;
        inner
            .run_hashes
            .entry(run_id.to_string())
            .or_default()
            .insert(request_hash.to_string());
        inner
            .index
            .entry(request_hash.to_string())
            .or_insert_with(|| record.clone());
        Ok(record)
    }

    /// The earliest stored record with this hash, from any run.
    pub fn lookup_cached(&self, request_hash: &str) -> Option<StoredRecord> {
        self.inner.lock().expect("store lock").index.get(request_hash).cloned()
    }

    pub fn run_has(&self, run_id: &str, request_hash: &str) -> bool {
        self.inner
            .lock()
            .expect("store lock")
            .run_hashes
            .get(run_id)
            .is_some_and(|s| s.contains(request_hash))
    }

    /// All parseable records of a run in log order.
    pub fn run_records(&self, run_id: &str) -> Result<Vec<StoredRecord>> {
        if self.manifest(run_id).is_none() {
            return Err(HarnessError::Store(format!("unknown run {run_id}")));
        }
        let (records, _) = read_log(run_id, &self.run_dir(run_id).join("records.jsonl"))?;
        Ok(records)
    }

    pub fn quarantined(&self) -> Vec<QuarantinedLine> {
        self.inner.lock().expect("store lock").quarantined.clone()
    }

    /// Appends a named statistics record unless the identical one is already in the run.
    pub fn record_stats(&self, run_id: &str, name: &str, value: serde_json::Value) -> Result<()> {
        let hash = content_hash(&serde_json::json!({"kind": "stats", "name": name, "value": value}));
        if !self.run_has(run_id, &hash) {
            self.append_record(
                run_id,
                &hash,
                RecordBody::Stats(StatsRecord {
                    name: name.to_string(),
                    value,
                }),
            )?;
        }
        Ok(())
    }

    /// Writes a report file under the run's `reports/` directory and returns its path.
    pub fn write_report(&self, run_id: &str, name: &str, contents: &str) -> Result<PathBuf> {
        let dir = self.reports_dir(run_id);
        fs::create_dir_all(&dir).map_err(|e| store_err("cannot create", &dir, e))?;
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| store_err("cannot write", &path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn stats(v: i64) -> RecordBody {
        RecordBody::Stats(StatsRecord {
            name: "x".into(),
            value: json!(v),
        })
    }

    #[test]
    fn hash_is_key_order_independent() {
        let a = content_hash(&json!({"a": 1, "b": "x"}));
        let b = content_hash(&serde_json::from_str(r#"{"b":"x","a":1}"#).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn record_shape_is_flat_and_tagged() {
        let r = StoredRecord {
            schema: RECORD_SCHEMA.into(),
            run_id: "r".into(),
            request_hash: "h".into(),
            body: stats(3),
        };
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["kind"], "stats");
        assert_eq!(v["schema"], RECORD_SCHEMA);
        let back: StoredRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);

        // Chat bodies carry their own request_hash next to the envelope's.
        let chat = StoredRecord {
            body: RecordBody::Chat(ChatExchange {
                system_text: None,
                user_text: "u".into(),
                response_text: "a".into(),
                model_id: "m".into(),
                base_url: "b".into(),
                temperature: 0.0,
                request_hash: "h".into(),
                timestamp_ms: 1,
                latency_ms: 2,
            }),
            ..r
        };
        let line = serde_json::to_string(&chat).unwrap();
        assert_eq!(serde_json::from_str::<StoredRecord>(&line).unwrap(), chat);
    }

    #[test]
    fn duplicate_hash_keeps_first() {
        let dir = tempfile::tempdir().unwrap();
        let store = RunStore::open(dir.path()).unwrap();
        let id = store.new_run_id("t");
        store.create_run(&RunManifest::new(id.clone(), "t", vec![])).unwrap();
        store.append_record(&id, "h1", stats(1)).unwrap();
        store.append_record(&id, "h1", stats(2)).unwrap();
        assert_eq!(store.lookup_cached("h1").unwrap().body, stats(1));
        assert!(store.lookup_cached("nope").is_none());
        assert!(store.run_has(&id, "h1"));
        assert_eq!(store.run_records(&id).unwrap().len(), 2);
    }
}
