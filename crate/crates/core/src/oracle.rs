//! Reference static analyzer: conservative unused-code detection, a
//! deliberately naive unreachable-code detector, and gold annotation.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::code_model::{CodeSnippet, Language, LineKind};
use crate::expr::{eval_guard, Env, Mode};
use crate::forge::InsertionRecord;
use crate::labels::{DeadType, SnippetLabel};
use crate::lexer::{bracket_delta, identifiers, ScrubbedLine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    NeverRead,
    UnusedImport,
    NeverCalled,
    AfterReturn,
    LiteralFalse,
    /// Line of a block placed by the pattern forge.
    InsertedPattern,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::NeverRead => "never_read",
            Reason::UnusedImport => "unused_import",
            Reason::NeverCalled => "never_called",
            Reason::AfterReturn => "after_return",
            Reason::LiteralFalse => "literal_false",
            Reason::InsertedPattern => "inserted_pattern",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineFinding {
    pub index: usize,
    #[serde(rename = "type")]
    pub kind: DeadType,
    pub reason: Reason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAnnotation {
    pub label: SnippetLabel,
    pub lines: Vec<LineFinding>,
}

impl GoldAnnotation {
    pub fn from_lines(mut lines: Vec<LineFinding>) -> Self {
        lines.sort();
        lines.dedup_by_key(|f| f.index);
        let has = |t: DeadType| lines.iter().any(|f| f.kind == t);
        Self {
            label: SnippetLabel::from_types(has(DeadType::Unused), has(DeadType::Unreachable)),
            lines,
        }
    }

    pub fn lines_of(&self, kind: DeadType) -> Vec<usize> {
        self.lines.iter().filter(|f| f.kind == kind).map(|f| f.index).collect()
    }
}

/// Per-snippet lexical view shared by the detectors.
struct View<'a> {
    snippet: &'a CodeSnippet,
    scrubbed: Vec<ScrubbedLine>,
    code: Vec<String>,
    /// Bracket depth at the start of each line.
    depth_before: Vec<i64>,
    /// Identifier occurrences per line: (char offset, name).
    idents: Vec<Vec<(usize, String)>>,
}

impl<'a> View<'a> {
    fn new(snippet: &'a CodeSnippet) -> Self {
        let scrubbed = snippet.scrubbed();
        let code = scrubbed.iter().map(|s| s.trimmed()).collect();
        let mut depth_before = Vec::with_capacity(scrubbed.len());
        let mut depth = 0i64;
        for s in &scrubbed {
            depth_before.push(depth);
            // java braces delimit blocks, not continuation lines
            let delta = match snippet.language() {
                Language::Python => bracket_delta(&s.code),
                Language::Java => paren_delta(&s.code),
            };
            depth = (depth + delta).max(0);
        }
        let idents = scrubbed.iter().map(|s| identifiers(&s.code)).collect();
        Self {
            snippet,
            scrubbed,
            code,
            depth_before,
            idents,
        }
    }

    fn lang(&self) -> Language {
        self.snippet.language()
    }

    fn n(&self) -> usize {
        self.code.len()
    }

    fn kind(&self, i: usize) -> LineKind {
        self.snippet.lines()[i].kind
    }

    fn indent(&self, i: usize) -> usize {
        self.snippet.lines()[i].indent
    }

    fn is_code(&self, i: usize) -> bool {
        self.kind(i) != LineKind::BlankOrComment
    }

    /// Nearest preceding code line with smaller indent.
    fn header_of(&self, i: usize) -> Option<usize> {
        (0..i)
            .rev()
            .find(|&j| self.is_code(j) && self.indent(j) < self.indent(i))
    }

    /// Code lines of a Python indented block opened by line `h`.
    fn python_block(&self, h: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for j in h + 1..self.n() {
            if !self.is_code(j) {
                continue;
            }
            if self.depth_before[j] == 0 && self.indent(j) <= self.indent(h) {
                break;
            }
            out.push(j);
        }
        out
    }

    /// Lines of a Java brace block opened on line `h` (exclusive of `h`,
    /// inclusive of the closing line).
    fn java_block(&self, h: usize) -> Vec<usize> {
        let mut depth = bracket_depth_braces(&self.scrubbed[h].code);
        let mut out = Vec::new();
        if depth <= 0 {
            return out;
        }
        for j in h + 1..self.n() {
            out.push(j);
            depth += bracket_depth_braces(&self.scrubbed[j].code);
            if depth <= 0 {
                break;
            }
        }
        out
    }
}

fn paren_delta(code: &[char]) -> i64 {
    code.iter().fold(0, |acc, c| match c {
        '(' | '[' => acc + 1,
        ')' | ']' => acc - 1,
        _ => acc,
    })
}

fn bracket_depth_braces(code: &[char]) -> i64 {
    code.iter().fold(0, |acc, c| match c {
        '{' => acc + 1,
        '}' => acc - 1,
        _ => acc,
    })
}

fn first_word(s: &str) -> &str {
    s.split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .next()
        .unwrap_or("")
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c == '_' || c.is_ascii_alphabetic())
        && chars.all(|c| c == '_' || c.is_ascii_alphanumeric())
}

/// Byte offset of the single top-level assignment `=` in `s`.
fn assignment_eq(s: &str) -> Option<usize> {
    let b = s.as_bytes();
    let mut depth = 0i64;
    let mut found = None;
    for (i, &c) in b.iter().enumerate() {
        match c {
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => depth -= 1,
            b'=' if depth == 0 => {
                let prev = if i > 0 { b[i - 1] } else { b' ' };
                let next = b.get(i + 1).copied().unwrap_or(b' ');
                if next == b'=' || prev == b'=' || b"<>!+-*/%&|^:@".contains(&prev) {
                    continue;
                }
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
            _ => {}
        }
    }
    found
}

const JAVA_MODIFIERS: [&str; 8] = [
    "final",
    "static",
    "private",
    "public",
    "protected",
    "volatile",
    "transient",
    "var",
];

const JAVA_NON_TYPES: [&str; 12] = [
    "return", "throw", "break", "continue", "assert", "else", "case", "new", "yield", "package", "import", "goto",
];

/// Target name of a simple assignment or declaration on a scrubbed line.
fn assignment_target(code: &str, lang: Language) -> Option<String> {
    match lang {
        Language::Python => {
            let eq = assignment_eq(code)?;
            let lhs = code[..eq].trim();
            // optional annotation `x: int = 1`
            let name = lhs.split(':').next()?.trim();
            is_identifier(name).then(|| name.to_string())
        }
        Language::Java => {
            let stmt = code.strip_suffix(';')?.trim();
            let lhs = match assignment_eq(stmt) {
                Some(eq) => stmt[..eq].trim(),
                None => stmt,
            };
            if lhs.contains(',') || lhs.contains('(') {
                return None;
            }
            let tokens: Vec<&str> = lhs.split_whitespace().collect();
            let (name, rest) = tokens.split_last()?;
            if !is_identifier(name) {
                return None;
            }
            let type_tokens: Vec<&&str> = rest.iter().filter(|t| !JAVA_MODIFIERS.contains(t)).collect();
            if rest.is_empty() {
                // plain reassignment needs an `=`
                return assignment_eq(stmt).map(|_| name.to_string());
            }
            if rest.iter().any(|t| *t == "public" || *t == "protected") {
                return None;
            }
            let ty_ok = type_tokens.len() == 1
                && !JAVA_NON_TYPES.contains(type_tokens[0])
                && type_tokens[0].starts_with(|c: char| c.is_ascii_alphabetic() || c == '_');
            let var_only = type_tokens.is_empty() && rest.contains(&"var");
            (ty_ok || var_only).then(|| name.to_string())
        }
    }
}

/// Names bound by an import line, or `None` if the line is not a
/// single-line import we can reason about.
fn import_bindings(code: &str, lang: Language) -> Option<Vec<String>> {
    match lang {
        Language::Python => {
            if let Some(rest) = code.strip_prefix("import ") {
                let mut names = Vec::new();
                for part in rest.split(',') {
                    let words: Vec<&str> = part.split_whitespace().collect();
                    match words.as_slice() {
                        [module] => names.push(module.split('.').next()?.to_string()),
                        [_, "as", alias] => names.push(alias.to_string()),
                        _ => return None,
                    }
                }
                return Some(names);
            }
            let rest = code.strip_prefix("from ")?;
            let (module, items) = rest.split_once(" import ")?;
            if module.trim() == "__future__" || items.contains('*') || items.contains('(') {
                return None;
            }
            let mut names = Vec::new();
            for part in items.split(',') {
                let words: Vec<&str> = part.split_whitespace().collect();
                match words.as_slice() {
                    [name] => names.push(name.to_string()),
                    [_, "as", alias] => names.push(alias.to_string()),
                    _ => return None,
                }
            }
            Some(names)
        }
        Language::Java => {
            let rest = code.strip_prefix("import ")?.strip_suffix(';')?.trim();
            let rest = rest.strip_prefix("static ").unwrap_or(rest).trim();
            if rest.ends_with('*') {
                return None;
            }
            Some(vec![rest.rsplit('.').next()?.to_string()])
        }
    }
}

/// Conservative unused-code detection.
pub fn find_unused(snippet: &CodeSnippet) -> Vec<LineFinding> {
    let v = View::new(snippet);
    let lang = v.lang();
    let mut occurrences: HashMap<&str, Vec<(usize, usize)>> = HashMap::new();
    for (i, ids) in v.idents.iter().enumerate() {
        for (pos, name) in ids {
            occurrences.entry(name.as_str()).or_default().push((i, *pos));
        }
    }
    let mut found: BTreeMap<usize, LineFinding> = BTreeMap::new();
    let flag = |found: &mut BTreeMap<usize, LineFinding>, i: usize, reason: Reason| {
        found.entry(i + 1).or_insert(LineFinding {
            index: i + 1,
            kind: DeadType::Unused,
            reason,
        });
    };

    // never-called python functions first so their bodies carry that reason
    if lang == Language::Python {
        for i in 0..v.n() {
            let code = &v.code[i];
            let Some(rest) = code.strip_prefix("def ").or_else(|| code.strip_prefix("async def ")) else {
                continue;
            };
            let name = first_word(rest.trim_start());
            if name.is_empty() || name.starts_with("__") || name.starts_with("test") {
                continue;
            }
            if v.header_of(i).is_some_and(|h| first_word(&v.code[h]) == "class") {
                continue;
            }
            let decorated = (0..i)
                .rev()
                .find(|&j| v.is_code(j))
                .is_some_and(|j| v.code[j].starts_with('@'));
            if decorated {
                continue;
            }
            let uses = occurrences.get(name).map_or(0, |o| o.len());
            if uses == 1 {
                flag(&mut found, i, Reason::NeverCalled);
                for j in v.python_block(i) {
                    flag(&mut found, j, Reason::NeverCalled);
                }
            }
        }
    }

    // imports
    let mut import_lines: HashSet<usize> = HashSet::new();
    for i in 0..v.n() {
        if v.depth_before[i] != 0 || !v.is_code(i) {
            continue;
        }
        let Some(names) = import_bindings(&v.code[i], lang) else {
            continue;
        };
        import_lines.insert(i);
        let unused = names.iter().all(|n| {
            occurrences
                .get(n.as_str())
                .is_none_or(|o| o.iter().all(|(line, _)| *line == i))
        });
        if unused && !names.is_empty() {
            flag(&mut found, i, Reason::UnusedImport);
        }
    }

    // simple assignments whose target is never read
    let mut targets: HashMap<String, Vec<(usize, usize)>> = HashMap::new();
    for i in 0..v.n() {
        if v.kind(i) != LineKind::Statement || v.depth_before[i] != 0 || import_lines.contains(&i) {
            continue;
        }
        if lang == Language::Python && v.header_of(i).is_some_and(|h| first_word(&v.code[h]) == "class") {
            continue;
        }
        let Some(name) = assignment_target(&v.code[i], lang) else {
            continue;
        };
        if name == "_" || name.starts_with("__") || name == "serialVersionUID" {
            continue;
        }
        // position of the target token on the line
        let Some(pos) = v.idents[i].iter().find(|(_, n)| *n == name).map(|(p, _)| *p) else {
            continue;
        };
        targets.entry(name).or_default().push((i, pos));
    }
    let mut names: Vec<&String> = targets.keys().collect();
    names.sort();
    for name in names {
        let sites = &targets[name];
        let all = occurrences.get(name.as_str()).map_or(0, |o| o.len());
        if all == sites.len() {
            for (i, _) in sites {
                flag(&mut found, *i, Reason::NeverRead);
            }
        }
    }
    found.into_values().collect()
}

fn is_jump(code: &str) -> bool {
    let s = code.trim().trim_end_matches(';').trim();
    matches!(first_word(s), "return" | "break" | "continue" | "raise" | "throw")
}

/// Guard text and trailing remainder of a condition line.
fn guard_of(text: &str, lang: Language) -> Option<(String, String)> {
    let (start, end) = crate::code_model::guard_span(text, lang)?;
    let (bs, be) = (
        crate::lexer::byte_offset(text, start),
        crate::lexer::byte_offset(text, end),
    );
    Some((text[bs..be].trim().to_string(), text[be..].to_string()))
}

fn literal_guard(text: &str, lang: Language) -> Option<(bool, String)> {
    let (cond, rest) = guard_of(text, lang)?;
    let value = eval_guard(&cond, lang, &Env::new(), Mode::LiteralOnly).ok()?;
    Some((value, rest))
}

/// Tool-level unreachable detection: statements after an unconditional
/// jump, and bodies of literal-constant false guards. Guards that mention
/// any identifier are never evaluated.
pub fn find_naive_unreachable(snippet: &CodeSnippet) -> Vec<LineFinding> {
    let v = View::new(snippet);
    let lang = v.lang();
    let mut found: BTreeMap<usize, LineFinding> = BTreeMap::new();
    let flag = |found: &mut BTreeMap<usize, LineFinding>, i: usize, reason: Reason| {
        if matches!(v.kind(i), LineKind::Statement | LineKind::Condition) {
            found.entry(i + 1).or_insert(LineFinding {
                index: i + 1,
                kind: DeadType::Unreachable,
                reason,
            });
        }
    };
    for i in 0..v.n() {
        if !v.is_code(i) || v.depth_before[i] != 0 {
            continue;
        }
        let text = &snippet.lines()[i].text;
        let mut jump = v.kind(i) == LineKind::Statement && is_jump(&v.code[i]);
        // `} while (false);` closes a do-block that runs once
        let do_tail = lang == Language::Java && v.code[i].starts_with('}') && v.code[i].ends_with(';');
        if v.kind(i) == LineKind::Condition && !do_tail {
            if let Some((value, rest)) = literal_guard(text, lang) {
                let inline = rest.trim_start_matches(|c: char| c == ')' || c.is_whitespace());
                if value && lang == Language::Java && is_jump(inline) && !inline.contains('{') {
                    jump = true;
                } else if !value {
                    flag(&mut found, i, Reason::LiteralFalse);
                    let body = match lang {
                        Language::Python => v.python_block(i),
                        Language::Java => java_guarded_lines(&v, i),
                    };
                    for j in body {
                        flag(&mut found, j, Reason::LiteralFalse);
                    }
                }
            }
        }
        if !jump {
            continue;
        }
        match lang {
            Language::Python => {
                for j in i + 1..v.n() {
                    if !v.is_code(j) {
                        continue;
                    }
                    if v.depth_before[j] == 0 && v.indent(j) < v.indent(i) {
                        break;
                    }
                    flag(&mut found, j, Reason::AfterReturn);
                }
            }
            Language::Java => {
                let mut depth = 0i64;
                for j in i + 1..v.n() {
                    if !v.is_code(j) {
                        continue;
                    }
                    let c = &v.code[j];
                    if depth == 0 && (c.starts_with('}') || matches!(first_word(c), "case" | "default")) {
                        break;
                    }
                    flag(&mut found, j, Reason::AfterReturn);
                    depth += bracket_depth_braces(&v.scrubbed[j].code);
                    if depth < 0 {
                        break;
                    }
                }
            }
        }
    }
    found.into_values().collect()
}

/// Lines controlled by a Java condition on line `i`: a brace block, the
/// same line for a one-line body, or the next statement.
fn java_guarded_lines(v: &View<'_>, i: usize) -> Vec<usize> {
    let code = &v.code[i];
    if code.ends_with('{') {
        return v.java_block(i);
    }
    if code.ends_with(';') {
        return Vec::new();
    }
    (i + 1..v.n()).find(|&j| v.is_code(j)).into_iter().collect()
}

/// Merges oracle findings with forge gold lines (which take precedence).
pub fn annotate(snippet: &CodeSnippet, known_insertions: Option<&InsertionRecord>) -> GoldAnnotation {
    let mut merged: BTreeMap<usize, LineFinding> = BTreeMap::new();
    for f in find_unused(snippet).into_iter().chain(find_naive_unreachable(snippet)) {
        merged.entry(f.index).or_insert(f);
    }
    if let Some(rec) = known_insertions {
        for g in &rec.gold_lines {
            merged.insert(
                g.index,
                LineFinding {
                    index: g.index,
                    kind: g.kind,
                    reason: Reason::InsertedPattern,
                },
            );
        }
    }
    GoldAnnotation::from_lines(merged.into_values().collect())
}

/// All oracle findings, unused and unreachable, sorted by line.
pub fn findings(snippet: &CodeSnippet) -> Vec<LineFinding> {
    annotate(snippet, None).lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::split_lines;

    const FILL_STR: &str = "def fill_str(Data):\n  s1 = input()\n  s2 = s1 + '<PAD>'\n  s3 = s1 + '<EOS>'\n  if len(s2) == 0:\n    print('Empty string')\n    Data.pad_str = None\n    Data.eos_str = None\n  else:\n    Data.pad_str = s2\n    Data.eos_str = 's3'\nfill_str(object())\n";

    fn py(src: &str) -> CodeSnippet {
        split_lines(src, Language::Python).unwrap()
    }

    fn java(src: &str) -> CodeSnippet {
        split_lines(src, Language::Java).unwrap()
    }

    fn idx(f: &[LineFinding]) -> Vec<usize> {
        f.iter().map(|x| x.index).collect()
    }

    #[test]
    fn fill_str_unused_s3() {
        let f = find_unused(&py(FILL_STR));
        assert_eq!(
            f,
            vec![LineFinding {
                index: 4,
                kind: DeadType::Unused,
                reason: Reason::NeverRead
            }]
        );
    }

    #[test]
    fn read_means_used() {
        assert!(find_unused(&py("x = 1\nprint(x)\n")).is_empty());
    }

    #[test]
    fn never_called_function() {
        let f = find_unused(&py(
            "def helper():\n    return 1\n\ndef main():\n    print(2)\n\nmain()\n",
        ));
        assert_eq!(idx(&f), vec![1, 2]);
        assert!(f.iter().all(|x| x.reason == Reason::NeverCalled));
    }

    #[test]
    fn java_unused_local_and_import() {
        let src = "import java.util.List;\nimport java.util.Map;\nclass A {\n    int f(Map<String, Integer> m) {\n        int y = m.size();\n        int z = 2;\n        return y;\n    }\n}\n";
        let f = find_unused(&java(src));
        assert_eq!(idx(&f), vec![1, 6]);
        assert_eq!(f[0].reason, Reason::UnusedImport);
    }

    #[test]
    fn after_return_python() {
        let f = find_naive_unreachable(&py("def f():\n    return\n    x = 1\nf()\n"));
        assert_eq!(idx(&f), vec![3]);
        assert_eq!(f[0].reason, Reason::AfterReturn);
    }

    #[test]
    fn literal_false_python() {
        let f = find_naive_unreachable(&py("if False:\n    y = 2\nz = 3\n"));
        assert_eq!(idx(&f), vec![1, 2]);
        assert!(f.iter().all(|x| x.reason == Reason::LiteralFalse));
        assert_eq!(idx(&find_naive_unreachable(&py("while 0:\n    pass\n"))), vec![1, 2]);
        assert_eq!(idx(&find_naive_unreachable(&py("if 3 < 2:\n    a = 1\n"))), vec![1, 2]);
    }

    #[test]
    fn variable_guards_are_not_evaluated() {
        let src = "a = sorted([4, 9, 1])\nif a[0] > a[-1]:\n    t = 1\n    t += 1\nprint(a)\n";
        assert!(find_naive_unreachable(&py(src)).is_empty());
    }

    #[test]
    fn java_jump_scope() {
        let src = "class A {\n  int f(int x) {\n    switch (x) {\n      case 1:\n        return 1;\n      default:\n        break;\n    }\n    do {\n      if (true) break;\n      int t = 1;\n    } while (false);\n    return 0;\n  }\n}\n";
        assert_eq!(idx(&find_naive_unreachable(&java(src))), vec![11]);
    }

    #[test]
    fn annotate_label_precedence() {
        let a = annotate(&py(FILL_STR), None);
        assert_eq!(a.label, SnippetLabel::Unused);
        let clean = annotate(&py("x = 1\nprint(x)\n"), None);
        assert_eq!(clean.label, SnippetLabel::Normal);
        assert!(clean.lines.is_empty());
    }
}
