//! Source snippets as ordered, kind-classified lines, plus the two
//! perturbations used by attribution: deleting a line and masking the guard
//! of a condition line.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexer::{self, byte_offset, is_ident_char, ScrubbedLine};

pub const DEFAULT_MASK_TOKEN: &str = "<mask>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Python,
    Java,
}

impl Language {
    pub const ALL: [Language; 2] = [Language::Python, Language::Java];

    pub fn as_str(self) -> &'static str {
        match self {
            Language::Python => "python",
            Language::Java => "java",
        }
    }

    /// Guess from a file extension (`py`, `java`).
    pub fn from_extension(ext: &str) -> Option<Language> {
        match ext.to_ascii_lowercase().as_str() {
            "py" => Some(Language::Python),
            "java" => Some(Language::Java),
            _ => None,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown language `{0}`")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "python" | "py" => Ok(Language::Python),
            "java" => Ok(Language::Java),
            other => Err(UnknownLanguage(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    /// Branch or loop header with a maskable guard expression.
    Condition,
    Statement,
    /// Opens or closes a scope without a guard (`else:`, `def f():`, `}`).
    Structural,
    BlankOrComment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineRecord {
    pub index: usize,
    pub text: String,
    pub kind: LineKind,
    pub indent: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeModelError {
    #[error("source contains no lines")]
    EmptySource,
    #[error("line {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("cannot delete the only line of a snippet")]
    MinimumSizeViolation,
    #[error("line {index} is not a condition line")]
    NotACondition { index: usize },
    #[error("guard of line {index} cannot be delimited")]
    MalformedGuard { index: usize },
}

/// An immutable, line-structured source snippet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSnippet {
    language: Language,
    lines: Vec<LineRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin_id: Option<String>,
}

impl CodeSnippet {
    /// Builds a snippet from raw line texts, classifying each line with
    /// multi-line string/comment state carried across lines.
    pub fn from_lines<S: AsRef<str>>(language: Language, texts: &[S]) -> Result<Self, CodeModelError> {
        if texts.is_empty() {
            return Err(CodeModelError::EmptySource);
        }
        let scrubbed = lexer::scrub_lines(texts.iter().map(|t| t.as_ref()), language);
        let lines = texts
            .iter()
            .zip(scrubbed.iter())
            .enumerate()
            .map(|(i, (text, scrub))| {
                let text = text.as_ref();
                let kind = if scrub.started_in_literal || !scrub.has_code {
                    LineKind::BlankOrComment
                } else {
                    kind_from_scrubbed(scrub, language)
                };
                LineRecord {
                    index: i + 1,
                    text: text.to_string(),
                    kind,
                    indent: indent_width(text),
                }
            })
            .collect();
        Ok(Self {
            language,
            lines,
            origin_id: None,
        })
    }

    pub fn with_origin(mut self, origin_id: impl Into<String>) -> Self {
        self.origin_id = Some(origin_id.into());
        self
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn lines(&self) -> &[LineRecord] {
        &self.lines
    }

    pub fn origin_id(&self) -> Option<&str> {
        self.origin_id.as_deref()
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// 1-based access.
    pub fn line(&self, index: usize) -> Option<&LineRecord> {
        index.checked_sub(1).and_then(|i| self.lines.get(i))
    }

    pub fn texts(&self) -> Vec<&str> {
        self.lines.iter().map(|l| l.text.as_str()).collect()
    }

    /// Scrubbed view of every line, in order.
    pub fn scrubbed(&self) -> Vec<ScrubbedLine> {
        lexer::scrub_lines(self.lines.iter().map(|l| l.text.as_str()), self.language)
    }

    fn rebuild(&self, texts: Vec<String>) -> Result<Self, CodeModelError> {
        let mut next = Self::from_lines(self.language, &texts)?;
        next.origin_id = self.origin_id.clone();
        Ok(next)
    }

    /// Replaces lines `start..=end` (1-based) by nothing; used to strip an
    /// inserted span.
    pub fn remove_span(&self, start: usize, end: usize) -> Result<Self, CodeModelError> {
        if start == 0 || end < start || end > self.len() {
            return Err(CodeModelError::IndexOutOfRange {
                index: end.max(start),
                len: self.len(),
            });
        }
        if end - start + 1 == self.len() {
            return Err(CodeModelError::MinimumSizeViolation);
        }
        let texts = self
            .lines
            .iter()
            .filter(|l| l.index < start || l.index > end)
            .map(|l| l.text.clone())
            .collect();
        self.rebuild(texts)
    }

    /// Inserts `texts` so that the first new line gets index `before`
    /// (`before == len + 1` appends).
    pub fn insert_lines<S: AsRef<str>>(&self, before: usize, texts: &[S]) -> Result<Self, CodeModelError> {
        if before == 0 || before > self.len() + 1 {
            return Err(CodeModelError::IndexOutOfRange {
                index: before,
                len: self.len(),
            });
        }
        let mut out: Vec<String> = Vec::with_capacity(self.len() + texts.len());
        out.extend(self.lines[..before - 1].iter().map(|l| l.text.clone()));
        out.extend(texts.iter().map(|t| t.as_ref().to_string()));
        out.extend(self.lines[before - 1..].iter().map(|l| l.text.clone()));
        self.rebuild(out)
    }
}

/// Splits source text into a snippet. Trailing newlines are normalized away;
/// interior blank lines are kept.
pub fn split_lines(source: &str, language: Language) -> Result<CodeSnippet, CodeModelError> {
    let body = source.trim_end_matches('\n');
    if body.is_empty() {
        return Err(CodeModelError::EmptySource);
    }
    let texts: Vec<&str> = body.split('\n').collect();
    CodeSnippet::from_lines(language, &texts)
}

/// Joins lines with `\n` and ends with exactly one newline.
pub fn render(snippet: &CodeSnippet) -> String {
    let mut out = String::new();
    for line in snippet.lines() {
        out.push_str(&line.text);
        out.push('\n');
    }
    out
}

/// The form `render(split_lines(s))` reproduces.
pub fn normalize(source: &str) -> String {
    let body = source.trim_end_matches('\n');
    if body.is_empty() {
        String::new()
    } else {
        format!("{body}\n")
    }
}

/// Width of leading whitespace; a tab counts as 4 columns.
pub fn indent_width(text: &str) -> usize {
    text.chars()
        .take_while(|c| c.is_whitespace())
        .map(|c| if c == '\t' { 4 } else { 1 })
        .sum()
}

pub fn leading_whitespace(text: &str) -> &str {
    let end = text
        .char_indices()
        .find(|(_, c)| !c.is_whitespace())
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    &text[..end]
}

/// Lexical line classification of a single line in isolation.
pub fn classify_line_kind(line: &str, language: Language) -> LineKind {
    let scrub = lexer::scrub_line(line, language);
    if !scrub.has_code {
        return LineKind::BlankOrComment;
    }
    kind_from_scrubbed(&scrub, language)
}

fn kind_from_scrubbed(scrub: &ScrubbedLine, language: Language) -> LineKind {
    let code = scrub.trimmed();
    match language {
        Language::Python => classify_python(&code),
        Language::Java => classify_java(&code),
    }
}

fn first_word(code: &str) -> &str {
    let end = code
        .char_indices()
        .find(|(_, c)| !is_ident_char(*c))
        .map(|(i, _)| i)
        .unwrap_or(code.len());
    &code[..end]
}

fn only_closers(code: &str) -> bool {
    code.chars()
        .all(|c| matches!(c, ')' | ']' | '}' | ',' | ';' | ':') || c.is_whitespace())
}

fn classify_python(code: &str) -> LineKind {
    if code.starts_with('@') || only_closers(code) {
        return LineKind::Structural;
    }
    match first_word(code) {
        "if" | "elif" | "while" => LineKind::Condition,
        "else" | "try" | "finally" | "def" | "class" | "with" | "for" | "except" => LineKind::Structural,
        "async" => {
            let rest = code["async".len()..].trim_start();
            if matches!(first_word(rest), "def" | "for" | "with") {
                LineKind::Structural
            } else {
                LineKind::Statement
            }
        }
        // soft keywords: only headers when the line opens a block
        "match" | "case" if code.ends_with(':') => LineKind::Structural,
        _ => LineKind::Statement,
    }
}

fn java_after_keyword_paren(code: &str, kw: &str) -> bool {
    code.strip_prefix(kw)
        .map(|rest| rest.trim_start().starts_with('('))
        .unwrap_or(false)
}

fn classify_java(code: &str) -> LineKind {
    if code.starts_with('*') || code.starts_with('@') {
        return if code.starts_with('*') {
            LineKind::BlankOrComment
        } else {
            LineKind::Structural
        };
    }
    let rest = code.trim_start_matches(|c: char| c == '}' || c.is_whitespace());
    if rest.is_empty() || only_closers(rest) {
        return LineKind::Structural;
    }
    let word = first_word(rest);
    match word {
        "if" | "while" if java_after_keyword_paren(rest, word) => return LineKind::Condition,
        "else" => {
            let tail = rest["else".len()..].trim_start();
            if first_word(tail) == "if" && java_after_keyword_paren(tail, "if") {
                return LineKind::Condition;
            }
            return LineKind::Structural;
        }
        "for" if java_after_keyword_paren(rest, "for") => {
            return if java_for_guard(rest).is_some() {
                LineKind::Condition
            } else {
                LineKind::Structural
            };
        }
        "do" | "try" | "finally" | "catch" | "switch" | "case" | "synchronized" => return LineKind::Structural,
        "default" if rest["default".len()..].trim_start().starts_with(':') => return LineKind::Structural,
        _ => {}
    }
    if rest.ends_with('{') {
        return LineKind::Structural;
    }
    // labels such as `outer:`
    if rest.ends_with(':') && first_word(rest).len() + 1 == rest.len() {
        return LineKind::Structural;
    }
    LineKind::Statement
}

/// For a scrubbed Java `for (...)` header, the char range of a non-empty
/// middle (guard) clause, relative to `code`.
fn java_for_guard(code: &str) -> Option<(usize, usize)> {
    let chars: Vec<char> = code.chars().collect();
    let open = chars.iter().position(|&c| c == '(')?;
    let mut depth = 0i64;
    let mut semis = Vec::new();
    let mut close = chars.len();
    for (i, &c) in chars.iter().enumerate().skip(open) {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => {
                depth -= 1;
                if depth == 0 {
                    close = i;
                    break;
                }
            }
            ';' if depth == 1 => semis.push(i),
            _ => {}
        }
    }
    if semis.len() != 2 {
        return None;
    }
    let (start, end) = (semis[0] + 1, semis[1]);
    let middle: String = chars[start..end].iter().collect();
    if middle.trim().is_empty() || end > close {
        return None;
    }
    Some((start, end))
}

/// Removes line `i` (1-based); the result is re-indexed.
pub fn delete_line(snippet: &CodeSnippet, index: usize) -> Result<CodeSnippet, CodeModelError> {
    if index == 0 || index > snippet.len() {
        return Err(CodeModelError::IndexOutOfRange {
            index,
            len: snippet.len(),
        });
    }
    if snippet.len() == 1 {
        return Err(CodeModelError::MinimumSizeViolation);
    }
    snippet.remove_span(index, index)
}

/// Replaces the guard expression of condition line `i` with `mask_token`,
/// keeping indentation, keyword and everything after the guard.
pub fn mask_condition(snippet: &CodeSnippet, index: usize, mask_token: &str) -> Result<CodeSnippet, CodeModelError> {
    let line = snippet.line(index).ok_or(CodeModelError::IndexOutOfRange {
        index,
        len: snippet.len(),
    })?;
    if line.kind != LineKind::Condition {
        return Err(CodeModelError::NotACondition { index });
    }
    let masked =
        mask_guard_text(&line.text, snippet.language(), mask_token).ok_or(CodeModelError::MalformedGuard { index })?;
    let mut texts: Vec<String> = snippet.lines().iter().map(|l| l.text.clone()).collect();
    texts[index - 1] = masked;
    snippet.rebuild(texts)
}

/// Char span `(start, end)` of the guard expression in `text`, or `None`.
pub fn guard_span(text: &str, language: Language) -> Option<(usize, usize)> {
    let scrub = lexer::scrub_line(text, language);
    let code = &scrub.code;
    let lead = code.iter().take_while(|c| c.is_whitespace()).count();
    let code_end = code.len() - code.iter().rev().take_while(|c| c.is_whitespace()).count();
    match language {
        Language::Python => {
            let head: String = code[lead..code_end].iter().collect();
            let kw = first_word(&head);
            if !matches!(kw, "if" | "elif" | "while") {
                return None;
            }
            let start = lead + kw.chars().count();
            // last top-level colon closes the header
            let mut depth = 0i64;
            let mut colon = None;
            for (i, &c) in code.iter().enumerate().take(code_end).skip(start) {
                match c {
                    '(' | '[' | '{' => depth += 1,
                    ')' | ']' | '}' => depth -= 1,
                    ':' if depth == 0 && code.get(i + 1) != Some(&'=') => colon = Some(i),
                    _ => {}
                }
            }
            let end = colon.unwrap_or(code_end);
            let guard: String = code[start..end].iter().collect();
            if guard.trim().is_empty() {
                return None;
            }
            Some((start, end))
        }
        Language::Java => {
            let head: String = code[lead..code_end].iter().collect();
            let skipped_braces = head.chars().take_while(|c| *c == '}' || c.is_whitespace()).count();
            let mut pos = lead + skipped_braces;
            let rest: String = code[pos..code_end].iter().collect();
            let mut kw = first_word(&rest).to_string();
            if kw == "else" {
                let after: String = code[pos + 4..code_end].iter().collect();
                let ws = after.chars().take_while(|c| c.is_whitespace()).count();
                pos += 4 + ws;
                kw = first_word(after.trim_start()).to_string();
            }
            if !matches!(kw.as_str(), "if" | "while" | "for") {
                return None;
            }
            let kw_end = pos + kw.len();
            let open = (kw_end..code_end).find(|&i| !code[i].is_whitespace())?;
            if code[open] != '(' {
                return None;
            }
            if kw == "for" {
                let rel: String = code[pos..code_end].iter().collect();
                let (s, e) = java_for_guard(&rel)?;
                return Some((pos + s, pos + e));
            }
            let mut depth = 0i64;
            let mut close = code_end;
            for (i, &c) in code.iter().enumerate().take(code_end).skip(open) {
                match c {
                    '(' | '[' | '{' => depth += 1,
                    ')' | ']' | '}' => {
                        depth -= 1;
                        if depth == 0 {
                            close = i;
                            break;
                        }
                    }
                    _ => {}
                }
            }
            let guard: String = code[open + 1..close].iter().collect();
            if guard.trim().is_empty() {
                return None;
            }
            Some((open + 1, close))
        }
    }
}

/// Text of a condition line with its guard replaced by `mask_token`.
pub fn mask_guard_text(text: &str, language: Language, mask_token: &str) -> Option<String> {
    let (start, end) = guard_span(text, language)?;
    let (bs, be) = (byte_offset(text, start), byte_offset(text, end));
    let before = &text[..bs];
    // python guards and java for-clauses are separated from what precedes
    // them by a single space; parenthesized java guards hug the parens
    let spaced = language == Language::Python || before.trim_end().ends_with(';');
    if spaced {
        Some(format!("{} {mask_token}{}", before.trim_end(), &text[be..]))
    } else {
        Some(format!("{before}{mask_token}{}", &text[be..]))
    }
}
