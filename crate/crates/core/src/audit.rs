//! Static audit of a proposed fix: did the gold dead lines go away, what
//! else changed, and does the oracle still find dead code.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::code_model::{split_lines, CodeSnippet, LineKind};
use crate::forge::diffexec::{differential, DiffExecConfig, DiffReport};
use crate::lexer::bracket_delta;
use crate::oracle::{findings, GoldAnnotation, LineFinding};

/// Default for `AuditReport::acceptable`: every changed line must be gold.
pub const DEFAULT_MIN_CONFINEMENT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffOp {
    Kept,
    Removed,
    Added,
    /// Matched up to whitespace.
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub op: DiffOp,
    pub orig_index: Option<usize>,
    pub new_index: Option<usize>,
}

/// Trimmed text with inner whitespace runs collapsed.
pub fn normalize_ws(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Line diff: longest common subsequence under whitespace-insensitive
/// equality; among longest alignments, the one with the most exact
/// matches. Ties resolve toward removing before adding.
pub fn diff_texts<A: AsRef<str>, B: AsRef<str>>(a: &[A], b: &[B]) -> Vec<DiffEntry> {
    let (n, m) = (a.len(), b.len());
    let na: Vec<String> = a.iter().map(|t| normalize_ws(t.as_ref())).collect();
    let nb: Vec<String> = b.iter().map(|t| normalize_ws(t.as_ref())).collect();
    // best[i][j] = (matches, exact) for suffixes a[i..], b[j..]
    let mut best = vec![vec![(0usize, 0usize); m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            let mut v = best[i + 1][j].max(best[i][j + 1]);
            if na[i] == nb[j] {
                let (k, e) = best[i + 1][j + 1];
                let exact = usize::from(a[i].as_ref() == b[j].as_ref());
                v = v.max((k + 1, e + exact));
            }
            best[i][j] = v;
        }
    }
    let mut out = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        if i < n && j < m && na[i] == nb[j] {
            let (k, e) = best[i + 1][j + 1];
            let exact = a[i].as_ref() == b[j].as_ref();
            if best[i][j] == (k + 1, e + usize::from(exact)) {
                out.push(DiffEntry {
                    op: if exact { DiffOp::Kept } else { DiffOp::Modified },
                    orig_index: Some(i + 1),
                    new_index: Some(j + 1),
                });
                i += 1;
                j += 1;
                continue;
            }
        }
        if i < n && (j == m || best[i][j] == best[i + 1][j]) {
            out.push(DiffEntry {
                op: DiffOp::Removed,
                orig_index: Some(i + 1),
                new_index: None,
            });
            i += 1;
        } else {
            out.push(DiffEntry {
                op: DiffOp::Added,
                orig_index: None,
                new_index: Some(j + 1),
            });
            j += 1;
        }
    }
    out
}

pub fn diff_lines(original: &CodeSnippet, fixed: &CodeSnippet) -> Vec<DiffEntry> {
    diff_texts(&original.texts(), &fixed.texts())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Absent when no gold annotation was supplied.
    pub removed_all_gold: Option<bool>,
    pub residual_oracle_findings: Vec<LineFinding>,
    pub diff_confinement: f64,
    pub parse_ok: bool,
    /// Original lines counted as changed (see `changed_lines`).
    pub changed_lines: Vec<usize>,
    /// Substantive lines present only in the fix.
    pub added_lines: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub differential: Option<DiffReport>,
}

impl AuditReport {
    /// Harness-side verdict: all gold dead code gone, fix parses, and at
    /// least `min_confinement` of the changed lines were gold.
    pub fn acceptable(&self, min_confinement: f64) -> bool {
        self.removed_all_gold == Some(true) && self.parse_ok && self.diff_confinement >= min_confinement
    }
}

fn substantive(kind: LineKind) -> bool {
    matches!(kind, LineKind::Statement | LineKind::Condition)
}

/// Original statement/condition lines removed or rewritten beyond
/// whitespace. Braces, blank lines and re-indentation are not counted.
pub fn changed_lines(original: &CodeSnippet, diff: &[DiffEntry]) -> Vec<usize> {
    diff.iter()
        .filter(|d| d.op == DiffOp::Removed)
        .filter_map(|d| d.orig_index)
        .filter(|&i| original.line(i).is_some_and(|l| substantive(l.kind)))
        .collect()
}

fn parses(snippet: &CodeSnippet) -> bool {
    let scrubbed = snippet.scrubbed();
    let mut depth = 0i64;
    for line in &scrubbed {
        depth += bracket_delta(&line.code);
        if depth < 0 {
            return false;
        }
    }
    depth == 0 && !scrubbed.last().is_some_and(|l| l.started_in_literal && !l.has_code)
}

fn gold_resolved(
    original: &CodeSnippet,
    gold: &GoldAnnotation,
    fixed: Option<&CodeSnippet>,
    fixed_findings: &[LineFinding],
) -> bool {
    let original_flags: HashSet<usize> = findings(original).iter().map(|f| f.index).collect();
    let Some(fixed) = fixed else {
        return true;
    };
    gold.lines.iter().all(|g| {
        let Some(line) = original.line(g.index) else {
            return true;
        };
        let text = normalize_ws(&line.text);
        let survivors: Vec<usize> = fixed
            .lines()
            .iter()
            .filter(|l| normalize_ws(&l.text) == text)
            .map(|l| l.index)
            .collect();
        if survivors.is_empty() {
            return true;
        }
        // kept, but no longer dead according to the oracle
        original_flags.contains(&g.index) && !survivors.iter().any(|i| fixed_findings.iter().any(|f| f.index == *i))
    })
}

/// Audits `fixed` against `original`.
pub fn audit(original: &CodeSnippet, gold: Option<&GoldAnnotation>, fixed: &str) -> AuditReport {
    let fixed_snippet = split_lines(fixed, original.language()).ok();
    let parse_ok = fixed_snippet.as_ref().is_some_and(parses);
    let residual = fixed_snippet.as_ref().map(findings).unwrap_or_default();
    let diff = match &fixed_snippet {
        Some(f) => diff_lines(original, f),
        None => diff_texts::<&str, &str>(&original.texts(), &[]),
    };
    let changed = changed_lines(original, &diff);
    let added_lines = diff
        .iter()
        .filter(|d| d.op == DiffOp::Added)
        .filter_map(|d| d.new_index)
        .filter(|&j| {
            fixed_snippet
                .as_ref()
                .and_then(|f| f.line(j))
                .is_some_and(|l| substantive(l.kind))
        })
        .collect();
    let diff_confinement = if changed.is_empty() {
        1.0
    } else {
        let gold_idx: HashSet<usize> = gold
            .map(|g| g.lines.iter().map(|l| l.index).collect())
            .unwrap_or_default();
        changed.iter().filter(|i| gold_idx.contains(i)).count() as f64 / changed.len().max(1) as f64
    };
    AuditReport {
        removed_all_gold: gold.map(|g| gold_resolved(original, g, fixed_snippet.as_ref(), &residual)),
        residual_oracle_findings: residual,
        diff_confinement,
        parse_ok,
        changed_lines: changed,
        added_lines,
        differential: None,
    }
}

/// `audit` plus differential execution of original and fix.
pub fn audit_with_exec(
    original: &CodeSnippet,
    gold: Option<&GoldAnnotation>,
    fixed: &str,
    exec: &DiffExecConfig,
    inputs: &[&str],
) -> AuditReport {
    let mut report = audit(original, gold, fixed);
    if let Ok(f) = split_lines(fixed, original.language()) {
        match differential(exec, original, &f, inputs) {
            Ok(d) => report.differential = Some(d),
            Err(e) => log::warn!("differential execution failed: {e}"),
        }
    }
    report
}
