//! Endpoint definitions and the JSON config file that holds them.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Base URL that routes requests to the in-process mock transport.
pub const MOCK_BASE_URL: &str = "mock://local";

fn default_timeout() -> u64 {
    60
}
fn default_retries() -> u32 {
    3
}
fn default_parallelism() -> usize {
    4
}
fn default_backoff() -> u64 {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key. The key itself is never stored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_ref: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_parallelism")]
    pub parallelism_limit: usize,
    /// First retry delay; doubles on each further attempt, with jitter.
    #[serde(default = "default_backoff")]
    pub retry_backoff_ms: u64,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model_id: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            model_id: model_id.into(),
            api_key_ref: None,
            temperature: 0.0,
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            parallelism_limit: default_parallelism(),
            retry_backoff_ms: default_backoff(),
        }
    }

    pub fn mock(model_id: impl Into<String>) -> Self {
        EndpointConfig {
            retry_backoff_ms: 1,
            ..EndpointConfig::new(MOCK_BASE_URL, model_id)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) {
            return Err(HarnessError::Config(format!(
                "temperature for {} must be >= 0, got {}",
                self.model_id, self.temperature
            )));
        }
        if self.parallelism_limit == 0 {
            return Err(HarnessError::Config(format!(
                "parallelism_limit for {} must be at least 1",
                self.model_id
            )));
        }
        if self.model_id.trim().is_empty() || self.base_url.trim().is_empty() {
            return Err(HarnessError::Config("endpoint needs base_url and model_id".into()));
        }
        Ok(())
    }

    /// Reads the API key named by `api_key_ref`, if one is configured.
    pub fn resolve_api_key(&self) -> Result<Option<String>> {
        match &self.api_key_ref {
            None => Ok(None),
            Some(var) => std::env::var(var).map(Some).map_err(|_| {
                HarnessError::Config(format!(
                    "environment variable {var} (api_key_ref for {}) is not set",
                    self.model_id
                ))
            }),
        }
    }
}

/// Named endpoints, e.g. `{"endpoints": {"gpt4": {"base_url": ..., "model_id": ...}}}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Config {
    #[serde(default)]
    pub endpoints: BTreeMap<String, EndpointConfig>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let config: Config = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("invalid config {}: {e}", path.display())))?;
        for endpoint in config.endpoints.values() {
            endpoint.validate()?;
        }
        Ok(config)
    }

    /// Looks up a named endpoint, or matches on model id. In mock mode any
    /// unknown name becomes a mock endpoint for that model.
    pub fn resolve(&self, name: &str, mock: bool) -> Result<EndpointConfig> {
        if let Some(e) = self.endpoints.get(name) {
            return Ok(e.clone());
        }
        if let Some(e) = self.endpoints.values().find(|e| e.model_id == name) {
            return Ok(e.clone());
        }
        if mock {
            return Ok(EndpointConfig::mock(name));
        }
        Err(HarnessError::Config(format!(
            "no endpoint named {name:?} in the config file (use --config or --mock)"
        )))
    }
}
