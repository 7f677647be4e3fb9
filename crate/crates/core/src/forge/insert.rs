use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DeadBlock, ForgeError, InsertionRecord};
use crate::code_model::{indent_width, leading_whitespace, CodeSnippet, Language, LineKind};
use crate::labels::GoldLine;
use crate::lexer::{identifiers, ScrubbedLine};

fn first_word(s: &str) -> &str {
    s.split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .next()
        .unwrap_or("")
}

fn has_word(s: &str, word: &str) -> bool {
    s.split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .any(|w| w == word)
}

fn is_jump_stmt(trimmed: &str) -> bool {
    matches!(first_word(trimmed), "return" | "break" | "continue" | "raise" | "throw")
}

/// Line indices `b` such that a block may be inserted so its first line
/// becomes line `b`.
pub fn legal_insertion_points(host: &CodeSnippet) -> Vec<usize> {
    let scrubbed = host.scrubbed();
    match host.language() {
        Language::Python => python_points(host, &scrubbed),
        Language::Java => java_points(host, &scrubbed),
    }
}

fn python_points(host: &CodeSnippet, scrubbed: &[ScrubbedLine]) -> Vec<usize> {
    let lines = host.lines();
    let code: Vec<String> = scrubbed.iter().map(|s| s.trimmed()).collect();
    let is_code = |i: usize| lines[i].kind != LineKind::BlankOrComment;
    let mut depth_before = Vec::with_capacity(lines.len());
    let mut depth = 0i64;
    for s in scrubbed {
        depth_before.push(depth);
        depth = (depth + crate::lexer::bracket_delta(&s.code)).max(0);
    }
    let last_future = code.iter().rposition(|c| c.starts_with("from __future__"));
    let mut out = Vec::new();
    for i in 0..lines.len() {
        let line = &lines[i];
        if !matches!(line.kind, LineKind::Statement | LineKind::Condition) {
            continue;
        }
        if depth_before[i] != 0 || first_word(&code[i]) == "elif" {
            continue;
        }
        if last_future.is_some_and(|f| i <= f) {
            continue;
        }
        if let Some(p) = (0..i).rev().find(|&j| is_code(j)) {
            let prev = &code[p];
            if prev.ends_with('\\') {
                continue;
            }
            let (pi, xi) = (lines[p].indent, line.indent);
            if pi == xi && (is_jump_stmt(prev) || prev.ends_with(':')) {
                continue;
            }
            if pi < xi && !prev.ends_with(':') {
                continue;
            }
            if pi > xi && prev.ends_with(':') {
                continue;
            }
        }
        let header = (0..i).rev().find(|&j| is_code(j) && lines[j].indent < line.indent);
        if header.is_some_and(|h| first_word(&code[h]) == "class") {
            continue;
        }
        out.push(i + 1);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scope {
    Code,
    Class,
    Switch,
    Init,
}

fn java_scope(context: &str, enclosing: Option<Scope>) -> Scope {
    let ctx = context.trim();
    if ctx.ends_with('=') || ctx.ends_with(']') || ctx.ends_with(',') {
        return Scope::Init;
    }
    if ctx.is_empty() {
        return if enclosing == Some(Scope::Init) {
            Scope::Init
        } else {
            Scope::Code
        };
    }
    if has_word(ctx, "switch") {
        return Scope::Switch;
    }
    if ["class", "interface", "enum", "record"]
        .iter()
        .any(|k| has_word(ctx, k))
    {
        return Scope::Class;
    }
    if has_word(ctx, "new") && ctx.ends_with(')') && !ctx.contains("->") {
        return Scope::Class;
    }
    Scope::Code
}

fn java_points(host: &CodeSnippet, scrubbed: &[ScrubbedLine]) -> Vec<usize> {
    let lines = host.lines();
    let code: Vec<String> = scrubbed.iter().map(|s| s.trimmed()).collect();
    let mut stack: Vec<Scope> = Vec::new();
    let mut parens = 0i64;
    let mut prev_code: Option<usize> = None;
    let mut out = Vec::new();
    for (i, s) in scrubbed.iter().enumerate() {
        let line = &lines[i];
        let text = &code[i];
        let legal_kind = matches!(line.kind, LineKind::Statement | LineKind::Condition);
        let forbidden_start = text.starts_with('}')
            || text.starts_with(')')
            || text.starts_with('.')
            || text.starts_with('+')
            || text.starts_with('?')
            || text.starts_with(':')
            || text.starts_with("&&")
            || text.starts_with("||")
            || matches!(first_word(text), "else" | "case" | "default" | "catch" | "finally")
            || text.starts_with("super(")
            || text.starts_with("this(");
        let prev_ok = prev_code.is_some_and(|p| {
            let prev = &code[p];
            (prev.ends_with(';') || prev.ends_with('{') || prev.ends_with('}')) && !is_jump_stmt(prev)
        });
        if legal_kind && !forbidden_start && prev_ok && parens == 0 && stack.last() == Some(&Scope::Code) {
            out.push(i + 1);
        }
        // advance scope state over this line
        let mut start = 0;
        for (k, &c) in s.code.iter().enumerate() {
            match c {
                '(' | '[' => parens += 1,
                ')' | ']' => parens = (parens - 1).max(0),
                '{' => {
                    let mut context: String = s.code[start..k].iter().collect();
                    // an Allman-style brace takes its context from the line above
                    if context.trim().is_empty() && start == 0 {
                        context = prev_code.map(|p| code[p].clone()).unwrap_or_default();
                    }
                    stack.push(java_scope(&context, stack.last().copied()));
                    start = k + 1;
                }
                '}' => {
                    stack.pop();
                    start = k + 1;
                }
                ';' => start = k + 1,
                _ => {}
            }
        }
        if s.has_code && line.kind != LineKind::BlankOrComment {
            prev_code = Some(i);
        }
    }
    out
}

/// Indentation unit used by the host: a tab, or the smallest positive
/// indent step between consecutive code lines (default four spaces).
fn indent_unit(host: &CodeSnippet) -> String {
    let code: Vec<_> = host
        .lines()
        .iter()
        .filter(|l| l.kind != LineKind::BlankOrComment)
        .collect();
    if code.iter().any(|l| l.text.starts_with('\t')) {
        return "\t".to_string();
    }
    let step = code
        .windows(2)
        .filter_map(|w| w[1].indent.checked_sub(w[0].indent).filter(|d| *d > 0))
        .min()
        .unwrap_or(4)
        .clamp(1, 8);
    " ".repeat(step)
}

fn check_names(host: &CodeSnippet, block: &DeadBlock) -> Result<(), ForgeError> {
    let scrubbed = host.scrubbed();
    let mut seen = HashSet::new();
    for s in &scrubbed {
        for (_, id) in identifiers(&s.code) {
            seen.insert(id);
        }
    }
    if let Some(name) = block.fresh_names.iter().find(|n| seen.contains(*n)) {
        return Err(ForgeError::NameCollision(name.clone()));
    }
    for s in &scrubbed {
        let ids = identifiers(&s.code);
        for (k, (pos, id)) in ids.iter().enumerate() {
            if !block.library_names.contains(id) {
                continue;
            }
            let next = s.code[pos + id.chars().count()..]
                .iter()
                .find(|c| !c.is_whitespace())
                .copied();
            let after_decl_keyword = k > 0
                && match ids[k - 1].1.as_str() {
                    "class" | "interface" | "enum" | "record" | "def" | "as" => true,
                    // `import java.util.List` names a package path, not a binding
                    "import" => block.language == Language::Python || next != Some('.'),
                    _ => false,
                };
            let rebinds = match block.language {
                Language::Python => next != Some('('),
                Language::Java => {
                    let value_like = id == "Math" || id.starts_with(|c: char| c.is_ascii_lowercase());
                    value_like && next != Some('.')
                }
            };
            if after_decl_keyword || rebinds {
                return Err(ForgeError::NameCollision(id.clone()));
            }
        }
    }
    Ok(())
}

/// Inserts `block` so that its first line becomes line `before`.
pub fn insert_at(host: &CodeSnippet, block: &DeadBlock, before: usize) -> Result<InsertionRecord, ForgeError> {
    if block.language != host.language() {
        return Err(ForgeError::LanguageMismatch {
            block: block.language,
            host: host.language(),
        });
    }
    if !legal_insertion_points(host).contains(&before) {
        return Err(ForgeError::IllegalInsertionPoint(before));
    }
    check_names(host, block)?;
    let anchor = host.line(before).ok_or(ForgeError::IllegalInsertionPoint(before))?;
    let base = leading_whitespace(&anchor.text);
    debug_assert_eq!(indent_width(base), anchor.indent);
    let rendered = block.render_lines(base, &indent_unit(host));
    let mutated = host.insert_lines(before, &rendered)?;
    let gold_lines = block
        .lines
        .iter()
        .enumerate()
        .filter_map(|(k, l)| {
            l.role.gold_type().map(|kind| GoldLine {
                index: before + k,
                kind,
            })
        })
        .collect();
    Ok(InsertionRecord {
        mutated,
        inserted_span: (before, before + rendered.len() - 1),
        gold_lines,
        pattern_id: block.pattern_id.clone(),
    })
}

/// Inserts `block` at a seeded-random legal boundary of `host`.
pub fn insert(host: &CodeSnippet, block: &DeadBlock, seed: u64) -> Result<InsertionRecord, ForgeError> {
    let points = legal_insertion_points(host);
    if points.is_empty() {
        return Err(ForgeError::NoInsertionPoint);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let before = points[rng.gen_range(0..points.len())];
    insert_at(host, block, before)
}
