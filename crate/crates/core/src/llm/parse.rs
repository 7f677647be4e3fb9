use log::warn;
use serde::{Deserialize, Serialize};

use super::LlmError;
use crate::labels::DeadType;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub line: usize,
    #[serde(rename = "type")]
    pub kind: DeadType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmVerdict {
    pub has_dead_code: bool,
    pub findings: Vec<Finding>,
    pub fixed_code: Option<String>,
    pub raw: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl LlmVerdict {
    /// Drops findings outside `1..=len`.
    pub fn within_bounds(mut self, len: usize) -> Self {
        let before = self.findings.len();
        self.findings.retain(|f| (1..=len).contains(&f.line));
        if self.findings.len() < before {
            self.warn(format!(
                "dropped {} findings outside lines 1..={len}",
                before - self.findings.len()
            ));
        }
        self
    }

    fn warn(&mut self, msg: String) {
        warn!("{msg}");
        self.warnings.push(msg);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Key {
    DeadCode,
    LineNumber,
    Type,
    Explanation,
    FixedCode,
}

const KEYS: [(&str, Key); 5] = [
    ("dead code", Key::DeadCode),
    ("line number", Key::LineNumber),
    ("type", Key::Type),
    ("explanation", Key::Explanation),
    ("fixed code", Key::FixedCode),
];

/// Recognizes `Key: value`, tolerating markdown bullets, headings and bold.
fn field(line: &str) -> Option<(Key, &str)> {
    let t = line.trim_start().trim_start_matches(['-', '*', '#', '>', ' ']);
    for (name, key) in KEYS {
        let Some(head) = t.get(..name.len()) else {
            continue;
        };
        if !head.eq_ignore_ascii_case(name) {
            continue;
        }
        let rest = t[name.len()..].trim_start_matches(['*', '_', ' ']);
        if let Some(value) = rest.strip_prefix(':') {
            return Some((key, value.trim().trim_start_matches(['*', '_']).trim()));
        }
    }
    None
}

fn clean_word(value: &str) -> String {
    value
        .trim_matches(|c: char| !c.is_ascii_alphanumeric())
        .to_ascii_lowercase()
}

/// `4`, `4, 7`, `6-8` and `lines 6 to 8` forms.
fn line_numbers(value: &str) -> Vec<usize> {
    let nums: Vec<usize> = value
        .split(|c: char| !c.is_ascii_digit())
        .filter_map(|s| s.parse().ok())
        .collect();
    let ranged = nums.len() == 2 && (value.contains('-') || value.contains(" to ") || value.contains('–'));
    if ranged && nums[0] <= nums[1] && nums[1] - nums[0] < 1000 {
        return (nums[0]..=nums[1]).collect();
    }
    nums
}

fn strip_fence(code: &str) -> String {
    let t = code.trim_matches('\n');
    let trimmed = t.trim();
    if let Some(rest) = trimmed.strip_prefix("```") {
        let body = match rest.find('\n') {
            Some(nl) => &rest[nl + 1..],
            None => "",
        };
        let body = body.trim_end();
        let body = body.strip_suffix("```").unwrap_or(body);
        return body.trim_end_matches([' ', '\t']).trim_end_matches('\n').to_string() + "\n";
    }
    if t.is_empty() {
        String::new()
    } else {
        format!("{t}\n")
    }
}

#[derive(Default)]
struct Block {
    lines: Vec<usize>,
    kind: Option<DeadType>,
    kind_raw: Option<String>,
    explanation: Vec<String>,
}

/// Tolerant extraction of the dead-code verdict, findings and fix.
pub fn parse_response(text: &str) -> Result<LlmVerdict, LlmError> {
    let lines: Vec<&str> = text.lines().collect();
    let header = lines
        .iter()
        .position(|l| matches!(field(l), Some((Key::DeadCode, _))))
        .ok_or(LlmError::UnparseableVerdict)?;
    let mut verdict = LlmVerdict {
        has_dead_code: false,
        findings: Vec::new(),
        fixed_code: None,
        raw: text.to_string(),
        warnings: Vec::new(),
    };
    let answer = field(lines[header]).map(|(_, v)| clean_word(v)).unwrap_or_default();
    let declared = if answer.starts_with("yes") {
        Some(true)
    } else if answer.starts_with("no") {
        Some(false)
    } else {
        verdict.warn(format!("unrecognized `Dead code:` value {answer:?}"));
        None
    };

    let mut blocks: Vec<Block> = Vec::new();
    let mut in_explanation = false;
    let mut k = header + 1;
    while k < lines.len() {
        let line = lines[k];
        match field(line) {
            Some((Key::FixedCode, first)) => {
                let mut code = String::from(first);
                for l in &lines[k + 1..] {
                    code.push('\n');
                    code.push_str(l);
                }
                let fixed = strip_fence(&code);
                if !fixed.trim().is_empty() {
                    verdict.fixed_code = Some(fixed);
                }
                break;
            }
            Some((Key::LineNumber, v)) => {
                in_explanation = false;
                let nums = line_numbers(v);
                if nums.is_empty() {
                    verdict.warn(format!("unparseable line number {v:?}"));
                }
                blocks.push(Block {
                    lines: nums,
                    ..Block::default()
                });
            }
            Some((Key::Type, v)) => {
                in_explanation = false;
                if blocks.last().is_none_or(|b| b.kind_raw.is_some()) {
                    blocks.push(Block::default());
                }
                let b = blocks.last_mut().expect("block");
                b.kind_raw = Some(v.to_string());
                b.kind = match clean_word(v).as_str() {
                    "unused" => Some(DeadType::Unused),
                    "unreachable" => Some(DeadType::Unreachable),
                    _ => None,
                };
            }
            Some((Key::Explanation, v)) => {
                in_explanation = true;
                if blocks.is_empty() {
                    blocks.push(Block::default());
                }
                let b = blocks.last_mut().expect("block");
                b.explanation.push(v.to_string());
            }
            Some((Key::DeadCode, _)) => in_explanation = false,
            None if in_explanation => {
                if let Some(b) = blocks.last_mut() {
                    b.explanation.push(line.to_string());
                }
            }
            None => {}
        }
        k += 1;
    }

    for b in blocks {
        let Some(kind) = b.kind else {
            verdict.warn(format!(
                "dropping finding with type {:?} at lines {:?}",
                b.kind_raw.as_deref().unwrap_or(""),
                b.lines
            ));
            continue;
        };
        if b.lines.is_empty() {
            verdict.warn("dropping finding without a line number".into());
            continue;
        }
        let joined = b.explanation.join("\n").trim().to_string();
        let explanation = if joined.is_empty() {
            verdict.warn(format!("finding at lines {:?} has no explanation", b.lines));
            None
        } else {
            Some(joined)
        };
        for line in b.lines {
            verdict.findings.push(Finding {
                line,
                kind,
                explanation: explanation.clone(),
            });
        }
    }

    verdict.has_dead_code = declared.unwrap_or(!verdict.findings.is_empty());
    if !verdict.has_dead_code && (!verdict.findings.is_empty() || verdict.fixed_code.is_some()) {
        verdict.warn("`Dead code: No` with findings or a fix; ignoring them".into());
        verdict.findings.clear();
        verdict.fixed_code = None;
    }
    Ok(verdict)
}
