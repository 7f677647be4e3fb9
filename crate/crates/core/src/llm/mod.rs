//! Prompt construction, chat transports and response parsing for the
//! explain-and-fix stage.

mod parse;
mod transport;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attribution::CandidateSet;
use crate::code_model::CodeSnippet;
use crate::labels::DeadType;

pub use parse::{parse_response, Finding, LlmVerdict};
pub use transport::{
    messages_hash, ChatParams, LiveTransport, LlmConfig, ReplayTransport, Transport, ENV_API_KEY, ENV_BASE_URL,
    ENV_MODEL,
};

pub const TEMPLATE_VERSION: &str = "v1";

const BASE_TEMPLATE: &str = include_str!("../../assets/prompts/v1/base.txt");
const HINTED_TEMPLATE: &str = include_str!("../../assets/prompts/v1/hinted.txt");
const FORMAT_REMINDER: &str = include_str!("../../assets/prompts/v1/reminder.txt");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LlmError {
    #[error("chat transport unavailable: {0}")]
    TransportUnavailable(String),
    #[error("no replay response for messages hash {hash}")]
    ReplayMiss { hash: String },
    #[error("response has no `Dead code:` header")]
    UnparseableVerdict,
    #[error("invalid LLM config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PromptMessages(pub Vec<Message>);

impl PromptMessages {
    pub fn user(content: String) -> Self {
        PromptMessages(vec![Message {
            role: Role::User,
            content,
        }])
    }

    pub fn messages(&self) -> &[Message] {
        &self.0
    }

    /// Content of the first user message.
    pub fn user_content(&self) -> &str {
        self.0
            .iter()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }

    /// Copy with the format reminder appended to the user message.
    pub fn with_reminder(&self) -> Self {
        let mut out = self.clone();
        if let Some(m) = out.0.iter_mut().rev().find(|m| m.role == Role::User) {
            m.content.push('\n');
            m.content.push_str(FORMAT_REMINDER);
        }
        out
    }
}

/// Substitutes `{name}` placeholders of the template in one pass, so
/// braces inside substituted code are left alone.
fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}').and_then(|close| {
            let name = &after[..close];
            vars.iter().find(|(k, _)| *k == name).map(|(_, v)| (close, *v))
        }) {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Source with `N: ` prefixes, one line per snippet line.
pub fn numbered_code(snippet: &CodeSnippet) -> String {
    snippet
        .lines()
        .iter()
        .map(|l| format!("{}: {}", l.index, l.text))
        .collect::<Vec<_>>()
        .join("\n")
}

/// `unused: 4: s3 = ... ; unreachable: 5: if ...`, or `none`.
pub fn render_suspects(snippet: &CodeSnippet, candidates: &CandidateSet) -> String {
    let mut parts = Vec::new();
    for kind in DeadType::ALL {
        for &i in candidates.lines(kind) {
            let text = snippet.line(i).map(|l| l.text.trim()).unwrap_or("");
            parts.push(format!("{kind}: {i}: {text}"));
        }
    }
    if parts.is_empty() {
        "none".into()
    } else {
        parts.join(" ; ")
    }
}

pub fn build_base_prompt(snippet: &CodeSnippet) -> PromptMessages {
    PromptMessages::user(fill(BASE_TEMPLATE, &[("code", &numbered_code(snippet))]))
}

pub fn build_hinted_prompt(snippet: &CodeSnippet, candidates: &CandidateSet) -> PromptMessages {
    let code = numbered_code(snippet);
    let suspects = render_suspects(snippet, candidates);
    PromptMessages::user(fill(HINTED_TEMPLATE, &[("code", &code), ("suspect_lines", &suspects)]))
}

/// Outcome of one explain-and-fix exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct Exchange {
    pub verdict: LlmVerdict,
    pub calls: usize,
}

/// Sends `messages`, parses the answer and retries once with a format
/// reminder if the answer has no verdict header.
pub fn explain<T: Transport + ?Sized>(
    transport: &T,
    messages: &PromptMessages,
    params: &ChatParams,
) -> Result<Exchange, LlmError> {
    let first = transport.chat(messages, params)?;
    match parse_response(&first) {
        Ok(verdict) => Ok(Exchange { verdict, calls: 1 }),
        Err(LlmError::UnparseableVerdict) => {
            warn!("unparseable verdict; retrying with format reminder");
            let second = transport.chat(&messages.with_reminder(), params)?;
            parse_response(&second).map(|verdict| Exchange { verdict, calls: 2 })
        }
        Err(e) => Err(e),
    }
}
