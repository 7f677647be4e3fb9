//! Scripted chat transport that answers with a record's gold lines.

use std::sync::atomic::{AtomicUsize, Ordering};

use dce_core::code_model::CodeSnippet;
use dce_core::harness::DatasetRecord;
use dce_core::llm::{numbered_code, ChatParams, LlmError, PromptMessages, Transport};

pub struct EchoTransport {
    known: Vec<(String, DatasetRecord, CodeSnippet)>,
    pub calls: AtomicUsize,
}

impl EchoTransport {
    pub fn new(records: &[DatasetRecord]) -> Self {
        let known = records
            .iter()
            .map(|r| {
                let snip = r.snippet().unwrap();
                (numbered_code(&snip), r.clone(), snip)
            })
            .collect();
        EchoTransport {
            known,
            calls: AtomicUsize::new(0),
        }
    }
}

impl Transport for EchoTransport {
    fn chat(&self, messages: &PromptMessages, _: &ChatParams) -> Result<String, LlmError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let prompt = messages.user_content();
        let (_, rec, snip) = self
            .known
            .iter()
            .filter(|(code, _, _)| prompt.contains(code.as_str()))
            .max_by_key(|(code, _, _)| code.len())
            .ok_or_else(|| LlmError::TransportUnavailable("prompt matches no known record".into()))?;
        if rec.dead_lines.is_empty() {
            return Ok("Dead code: No\n".into());
        }
        Ok(super::golden::answer(rec, snip, &[]))
    }
}
