//! Light per-language lexing: blank out string literals and comments so that
//! keyword matching, bracket counting and identifier search only see code.
//!
//! Scrubbed output keeps the same number of `char`s as the input line, so a
//! char position found in the scrubbed text maps back onto the raw line.
//! Python f-string interpolations (`{expr}`) are left visible because the
//! names inside them are real reads.

use crate::code_model::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Carry {
    Code,
    /// Inside a triple-quoted Python string. `quote` is `'` or `"`.
    TripleString {
        quote: char,
        fstring: bool,
    },
    /// Inside a Java `/* ... */` comment.
    BlockComment,
    /// Inside a Java `"""` text block.
    TextBlock,
}

/// One scrubbed line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScrubbedLine {
    /// Same char count as the source line; literal and comment chars are spaces.
    pub code: Vec<char>,
    /// True when the line started inside a multi-line string or comment.
    pub started_in_literal: bool,
    /// True when the line has at least one code char that is not whitespace.
    pub has_code: bool,
}

impl ScrubbedLine {
    pub fn as_string(&self) -> String {
        self.code.iter().collect()
    }

    /// Scrubbed text with trailing/leading whitespace removed.
    pub fn trimmed(&self) -> String {
        self.as_string().trim().to_string()
    }
}

/// Stateful scrubber carrying multi-line string/comment state across lines.
#[derive(Debug, Clone)]
pub struct Scrubber {
    language: Language,
    carry: Carry,
}

impl Scrubber {
    pub fn new(language: Language) -> Self {
        Self {
            language,
            carry: Carry::Code,
        }
    }

    pub fn scrub(&mut self, line: &str) -> ScrubbedLine {
        let started_in_literal = self.carry != Carry::Code;
        let chars: Vec<char> = line.chars().collect();
        let mut out = vec![' '; chars.len()];
        let mut i = 0;
        while i < chars.len() {
            match self.carry {
                Carry::TripleString { quote, fstring } => {
                    if chars[i] == '\\' {
                        i += 2;
                        continue;
                    }
                    if starts_with_at(&chars, i, &[quote, quote, quote]) {
                        self.carry = Carry::Code;
                        i += 3;
                        continue;
                    }
                    if fstring && chars[i] == '{' {
                        if chars.get(i + 1) == Some(&'{') {
                            i += 2;
                            continue;
                        }
                        i = copy_interpolation(&chars, i, &mut out);
                        continue;
                    }
                    i += 1;
                }
                Carry::BlockComment => {
                    if starts_with_at(&chars, i, &['*', '/']) {
                        self.carry = Carry::Code;
                        i += 2;
                    } else {
                        i += 1;
                    }
                }
                Carry::TextBlock => {
                    if chars[i] == '\\' {
                        i += 2;
                        continue;
                    }
                    if starts_with_at(&chars, i, &['"', '"', '"']) {
                        self.carry = Carry::Code;
                        i += 3;
                    } else {
                        i += 1;
                    }
                }
                Carry::Code => match self.language {
                    Language::Python => {
                        let c = chars[i];
                        if c == '#' {
                            break;
                        }
                        if c == '\'' || c == '"' {
                            let (prefix_start, fstring) = string_prefix(&chars, i);
                            // the prefix letters are part of the literal, not identifiers
                            for slot in out.iter_mut().take(i).skip(prefix_start) {
                                *slot = ' ';
                            }
                            if starts_with_at(&chars, i, &[c, c, c]) {
                                self.carry = Carry::TripleString { quote: c, fstring };
                                i += 3;
                                continue;
                            }
                            i = skip_short_string(&chars, i, c, fstring, &mut out);
                            continue;
                        }
                        out[i] = c;
                        i += 1;
                    }
                    Language::Java => {
                        let c = chars[i];
                        if starts_with_at(&chars, i, &['/', '/']) {
                            break;
                        }
                        if starts_with_at(&chars, i, &['/', '*']) {
                            self.carry = Carry::BlockComment;
                            i += 2;
                            continue;
                        }
                        if starts_with_at(&chars, i, &['"', '"', '"']) {
                            self.carry = Carry::TextBlock;
                            i += 3;
                            continue;
                        }
                        if c == '"' || c == '\'' {
                            i = skip_short_string(&chars, i, c, false, &mut out);
                            continue;
                        }
                        out[i] = c;
                        i += 1;
                    }
                },
            }
        }
        let has_code = out.iter().any(|c| !c.is_whitespace());
        ScrubbedLine {
            code: out,
            started_in_literal,
            has_code,
        }
    }
}

/// Scrub a whole sequence of lines with carried state.
pub fn scrub_lines<'a, I>(lines: I, language: Language) -> Vec<ScrubbedLine>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut scrubber = Scrubber::new(language);
    lines.into_iter().map(|l| scrubber.scrub(l)).collect()
}

/// Scrub one line in isolation (no carried state).
pub fn scrub_line(line: &str, language: Language) -> ScrubbedLine {
    Scrubber::new(language).scrub(line)
}

fn starts_with_at(chars: &[char], at: usize, pat: &[char]) -> bool {
    chars.len() >= at + pat.len() && chars[at..at + pat.len()] == *pat
}

/// Returns the start index of a Python string prefix (r, b, f, u, rb, fr, ...)
/// ending right before `quote_at`, and whether it marks an f-string.
fn string_prefix(chars: &[char], quote_at: usize) -> (usize, bool) {
    let mut start = quote_at;
    while start > 0 && quote_at - start < 2 {
        let c = chars[start - 1].to_ascii_lowercase();
        if matches!(c, 'r' | 'b' | 'f' | 'u') {
            start -= 1;
        } else {
            break;
        }
    }
    // a prefix only counts when it is not the tail of a longer identifier
    if start > 0 && is_ident_char(chars[start - 1]) {
        return (quote_at, false);
    }
    let fstring = chars[start..quote_at].iter().any(|c| c.eq_ignore_ascii_case(&'f'));
    (start, fstring)
}

fn skip_short_string(chars: &[char], open: usize, quote: char, fstring: bool, out: &mut [char]) -> usize {
    let mut i = open + 1;
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' {
            i += 2;
            continue;
        }
        if c == quote {
            return i + 1;
        }
        if fstring && c == '{' {
            if chars.get(i + 1) == Some(&'{') {
                i += 2;
                continue;
            }
            i = copy_interpolation(chars, i, out);
            continue;
        }
        i += 1;
    }
    chars.len()
}

/// Copies an f-string `{...}` interpolation body into `out`; returns the index
/// after the closing brace.
fn copy_interpolation(chars: &[char], open: usize, out: &mut [char]) -> usize {
    let mut depth = 0usize;
    let mut i = open;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return i + 1;
                }
            }
            _ => {
                if i > open {
                    out[i] = c;
                }
            }
        }
        i += 1;
    }
    chars.len()
}

pub fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_ascii_alphabetic()
}

pub fn is_ident_char(c: char) -> bool {
    c == '_' || c.is_ascii_alphanumeric()
}

/// Identifier tokens of already-scrubbed text, with their char offsets.
/// Numeric literals (`1e5`, `0x1F`, `3.7f`) are skipped whole.
pub fn identifiers(scrubbed: &[char]) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < scrubbed.len() {
        let c = scrubbed[i];
        if c.is_ascii_digit() {
            while i < scrubbed.len() && (is_ident_char(scrubbed[i]) || scrubbed[i] == '.') {
                i += 1;
            }
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < scrubbed.len() && is_ident_char(scrubbed[i]) {
                i += 1;
            }
            out.push((start, scrubbed[start..i].iter().collect()));
            continue;
        }
        i += 1;
    }
    out
}

/// Net bracket depth change `([{` minus `)]}` across scrubbed text.
pub fn bracket_delta(scrubbed: &[char]) -> i64 {
    scrubbed.iter().fold(0i64, |acc, c| match c {
        '(' | '[' | '{' => acc + 1,
        ')' | ']' | '}' => acc - 1,
        _ => acc,
    })
}

/// Converts a char offset into a byte offset of `s`.
pub fn byte_offset(s: &str, char_index: usize) -> usize {
    s.char_indices().nth(char_index).map(|(b, _)| b).unwrap_or(s.len())
}
