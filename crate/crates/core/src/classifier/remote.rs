use std::thread;
use std::time::Duration;

use log::{debug, warn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{ClassProbabilities, Classifier, ClassifierConfig, ClassifierError, ClassifierKind};
use crate::code_model::{render, CodeSnippet, Language};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireItem {
    pub language: Language,
    pub code: String,
}

impl WireItem {
    pub fn from_snippet(snippet: &CodeSnippet) -> Self {
        WireItem {
            language: snippet.language(),
            code: render(snippet),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireProbs {
    pub normal: f64,
    pub unused: f64,
    pub unreachable: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireResult {
    pub probs: WireProbs,
    pub model: String,
}

impl WireResult {
    fn validate(&self) -> Result<ClassProbabilities, String> {
        ClassProbabilities::checked(self.probs.normal, self.probs.unused, self.probs.unreachable)
    }
}

#[derive(Serialize)]
struct BatchRequest<'a> {
    items: &'a [WireItem],
}

#[derive(Deserialize)]
struct BatchResponse {
    results: Vec<WireResult>,
}

enum Failure {
    Transient(String),
    Malformed(String),
}

/// Client for the classifier wire protocol.
#[derive(Debug)]
pub struct RemoteClassifier {
    agent: ureq::Agent,
    endpoint: String,
    max_retries: usize,
    batch_size: usize,
    backoff: Duration,
}

impl RemoteClassifier {
    pub fn new(config: &ClassifierConfig) -> Result<Self, ClassifierError> {
        config.validate()?;
        let endpoint = config
            .endpoint
            .clone()
            .ok_or_else(|| ClassifierError::Config("remote classifier needs an endpoint".into()))?;
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build();
        Ok(RemoteClassifier {
            agent,
            endpoint: endpoint.trim_end_matches('/').to_string(),
            max_retries: config.max_retries,
            batch_size: config.batch_size,
            backoff: Duration::from_millis(config.backoff_ms),
        })
    }

    fn post_once<T: DeserializeOwned>(&self, path: &str, body: &serde_json::Value) -> Result<T, Failure> {
        let url = format!("{}/{path}", self.endpoint);
        match self.agent.post(&url).send_json(body) {
            Ok(resp) if resp.status() == 200 => {
                let text = resp
                    .into_string()
                    .map_err(|e| Failure::Transient(format!("reading body: {e}")))?;
                serde_json::from_str(&text).map_err(|e| Failure::Malformed(e.to_string()))
            }
            Ok(resp) => Err(Failure::Transient(format!("HTTP {}", resp.status()))),
            Err(ureq::Error::Status(code, _)) => Err(Failure::Transient(format!("HTTP {code}"))),
            Err(e) => Err(Failure::Transient(e.to_string())),
        }
    }

    /// POSTs with exponential backoff; `check` turns a decoded body into the
    /// result or a schema complaint, which is retried like a 5xx.
    fn post<T, R>(
        &self,
        path: &str,
        body: &serde_json::Value,
        check: impl Fn(T) -> Result<R, String>,
    ) -> Result<R, ClassifierError>
    where
        T: DeserializeOwned,
    {
        let attempts = self.max_retries + 1;
        let mut delay = self.backoff;
        let mut last = Failure::Transient("no attempt made".into());
        for attempt in 1..=attempts {
            let outcome = self
                .post_once::<T>(path, body)
                .and_then(|v| check(v).map_err(Failure::Malformed));
            match outcome {
                Ok(v) => {
                    debug!("{path}: ok on attempt {attempt}");
                    return Ok(v);
                }
                Err(f) => {
                    let msg = match &f {
                        Failure::Transient(m) | Failure::Malformed(m) => m.clone(),
                    };
                    warn!("{path}: attempt {attempt}/{attempts} failed: {msg}");
                    last = f;
                }
            }
            if attempt < attempts {
                thread::sleep(delay);
                delay = delay.saturating_mul(2);
            }
        }
        Err(match last {
            Failure::Malformed(m) => ClassifierError::RemoteMalformed(m),
            Failure::Transient(m) => ClassifierError::RemoteUnavailable { attempts, last: m },
        })
    }

    fn classify_chunk(&self, items: &[WireItem]) -> Result<Vec<ClassProbabilities>, ClassifierError> {
        let body = serde_json::to_value(BatchRequest { items }).expect("request serializes");
        let n = items.len();
        self.post("classify_batch", &body, |resp: BatchResponse| {
            if resp.results.len() != n {
                return Err(format!("{} results for {n} items", resp.results.len()));
            }
            resp.results.iter().map(WireResult::validate).collect()
        })
    }
}

impl Classifier for RemoteClassifier {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Remote
    }

    fn classify(&self, snippet: &CodeSnippet) -> Result<ClassProbabilities, ClassifierError> {
        let body = serde_json::to_value(WireItem::from_snippet(snippet)).expect("request serializes");
        self.post("classify", &body, |r: WireResult| r.validate())
    }

    fn classify_batch(&self, snippets: &[CodeSnippet]) -> Result<Vec<ClassProbabilities>, ClassifierError> {
        let items: Vec<WireItem> = snippets.iter().map(WireItem::from_snippet).collect();
        let mut out = Vec::with_capacity(items.len());
        for chunk in items.chunks(self.batch_size) {
            out.extend(self.classify_chunk(chunk)?);
        }
        Ok(out)
    }

    fn prefers_batch(&self) -> bool {
        true
    }
}
