use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::{LlmError, PromptMessages};

pub const ENV_BASE_URL: &str = "DCE_LLM_BASE_URL";
pub const ENV_API_KEY: &str = "DCE_LLM_API_KEY";
pub const ENV_MODEL: &str = "DCE_LLM_MODEL";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChatParams {
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for ChatParams {
    fn default() -> Self {
        ChatParams {
            temperature: 0.1,
            max_tokens: 1024,
        }
    }
}

pub trait Transport: Send + Sync {
    fn chat(&self, messages: &PromptMessages, params: &ChatParams) -> Result<String, LlmError>;
}

/// Hex sha256 of the JSON-serialized message list; the replay key.
pub fn messages_hash(messages: &PromptMessages) -> String {
    let json = serde_json::to_string(messages).expect("messages serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Canned responses in `<dir>/<messages_hash>.txt`.
#[derive(Debug, Clone)]
pub struct ReplayTransport {
    dir: PathBuf,
}

impl ReplayTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayTransport { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, messages: &PromptMessages) -> PathBuf {
        self.dir.join(format!("{}.txt", messages_hash(messages)))
    }

    /// Writes a canned response for `messages`.
    pub fn store(&self, messages: &PromptMessages, response: &str) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.path_for(messages);
        std::fs::write(&path, response)?;
        Ok(path)
    }
}

impl Transport for ReplayTransport {
    fn chat(&self, messages: &PromptMessages, _: &ChatParams) -> Result<String, LlmError> {
        let path = self.path_for(messages);
        match std::fs::read_to_string(&path) {
            Ok(text) => Ok(text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(LlmError::ReplayMiss {
                hash: messages_hash(messages),
            }),
            Err(e) => Err(LlmError::TransportUnavailable(format!("{}: {e}", path.display()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub base_url: Option<String>,
    /// Only ever read from the environment.
    #[serde(skip)]
    pub api_key: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_ms: u64,
    pub max_concurrency: usize,
    pub max_retries: usize,
    pub backoff_ms: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            base_url: None,
            api_key: None,
            model: "gpt-4o-mini".into(),
            temperature: 0.1,
            max_tokens: 1024,
            timeout_ms: 120_000,
            max_concurrency: 4,
            max_retries: 2,
            backoff_ms: 500,
        }
    }
}

impl LlmConfig {
    /// Applies `DCE_LLM_*` variables through `get`.
    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) {
        if let Some(v) = get(ENV_BASE_URL).filter(|v| !v.is_empty()) {
            self.base_url = Some(v);
        }
        if let Some(v) = get(ENV_API_KEY).filter(|v| !v.is_empty()) {
            self.api_key = Some(v);
        }
        if let Some(v) = get(ENV_MODEL).filter(|v| !v.is_empty()) {
            self.model = v;
        }
    }

    pub fn params(&self) -> ChatParams {
        ChatParams {
            temperature: self.temperature,
            max_tokens: self.max_tokens,
        }
    }
}

struct Semaphore {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(n: usize) -> Self {
        Semaphore {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a Semaphore);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

/// OpenAI-compatible chat-completions client.
pub struct LiveTransport {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
    model: String,
    max_retries: usize,
    backoff: Duration,
    slots: Semaphore,
}

impl LiveTransport {
    pub fn new(config: &LlmConfig) -> Result<Self, LlmError> {
        let base = config
            .base_url
            .as_deref()
            .filter(|b| !b.is_empty())
            .ok_or_else(|| LlmError::Config(format!("{ENV_BASE_URL} is not set")))?;
        Ok(LiveTransport {
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_millis(config.timeout_ms))
                .build(),
            url: format!("{}/chat/completions", base.trim_end_matches('/')),
            api_key: config.api_key.clone(),
            model: config.model.clone(),
            max_retries: config.max_retries,
            backoff: Duration::from_millis(config.backoff_ms),
            slots: Semaphore::new(config.max_concurrency),
        })
    }

    fn request_body(&self, messages: &PromptMessages, params: &ChatParams) -> serde_json::Value {
        json!({
            "model": self.model,
            "messages": messages,
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        })
    }

    fn once(&self, body: &serde_json::Value) -> Result<String, (bool, String)> {
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let resp = match req.send_json(body) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, _)) => return Err((code == 429 || code >= 500, format!("HTTP {code}"))),
            Err(e) => return Err((true, e.to_string())),
        };
        let value: serde_json::Value = resp.into_json().map_err(|e| (false, format!("bad JSON: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| (false, "response lacks choices[0].message.content".to_string()))
    }
}

impl Transport for LiveTransport {
    fn chat(&self, messages: &PromptMessages, params: &ChatParams) -> Result<String, LlmError> {
        let _permit = self.slots.acquire();
        let body = self.request_body(messages, params);
        let mut delay = self.backoff;
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.once(&body) {
                Ok(text) => {
                    debug!("chat ok on attempt {attempt}");
                    return Ok(text);
                }
                Err((retryable, msg)) => {
                    warn!("chat attempt {attempt} failed: {msg}");
                    if !retryable || attempt > self.max_retries {
                        return Err(LlmError::TransportUnavailable(msg));
                    }
                }
            }
            std::thread::sleep(delay);
            delay = delay.saturating_mul(2);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let a = PromptMessages::user("hello".into());
        let b = PromptMessages::user("hello!".into());
        assert_eq!(messages_hash(&a), messages_hash(&a.clone()));
        assert_ne!(messages_hash(&a), messages_hash(&b));
        assert_eq!(messages_hash(&a).len(), 64);
    }

    #[test]
    fn replay_roundtrip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let t = ReplayTransport::new(dir.path());
        let m = PromptMessages::user("q".into());
        assert!(matches!(
            t.chat(&m, &ChatParams::default()),
            Err(LlmError::ReplayMiss { .. })
        ));
        t.store(&m, "Dead code: No\n").unwrap();
        assert_eq!(t.chat(&m, &ChatParams::default()).unwrap(), "Dead code: No\n");
    }

    #[test]
    fn default_temperature() {
        let cfg = LlmConfig {
            base_url: Some("http://localhost:1".into()),
            ..LlmConfig::default()
        };
        let t = LiveTransport::new(&cfg).unwrap();
        let body = t.request_body(&PromptMessages::user("x".into()), &ChatParams::default());
        assert_eq!(body["temperature"], json!(0.1));
        assert_eq!(body["messages"], json!([{"role": "user", "content": "x"}]));
    }

    #[test]
    fn env_overrides() {
        let mut cfg = LlmConfig::default();
        cfg.apply_env(|k| match k {
            ENV_BASE_URL => Some("http://h/v1".into()),
            ENV_API_KEY => Some("k".into()),
            _ => None,
        });
        assert_eq!(cfg.base_url.as_deref(), Some("http://h/v1"));
        assert_eq!(cfg.api_key.as_deref(), Some("k"));
        assert!(LiveTransport::new(&LlmConfig::default()).is_err());
    }
}
