//! Leave-one-out dead-code attribution and soft-threshold candidate
//! selection.

use std::collections::BTreeMap;

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{ClassProbabilities, Classifier, ClassifierError};
use crate::code_model::{delete_line, mask_condition, CodeModelError, CodeSnippet, LineKind, DEFAULT_MASK_TOKEN};
use crate::labels::DeadType;

pub const DEFAULT_TAU: f64 = 2.0;
pub const DEFAULT_EPSILON: f64 = 0.02;
pub const DEFAULT_WINDOW: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttributionError {
    #[error("line {0} is not a statement or condition")]
    IneligibleLine(usize),
    #[error("tau must be >= 1, got {0}")]
    InvalidTau(f64),
    #[error("epsilon must be >= 0, got {0}")]
    InvalidEpsilon(f64),
    #[error("window must be at least 1 line")]
    InvalidWindow,
    #[error("classifier failed on {}: {source}", describe_lines(.lines))]
    Classifier {
        /// Perturbed lines whose classification failed; empty for the
        /// unperturbed snippet.
        lines: Vec<usize>,
        source: ClassifierError,
    },
    #[error(transparent)]
    Model(#[from] CodeModelError),
}

fn describe_lines(lines: &[usize]) -> String {
    match lines {
        [] => "the unperturbed snippet".into(),
        [one] => format!("line {one}"),
        many => format!("lines {many:?}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributionScore {
    pub index: usize,
    pub a_unused: f64,
    pub a_unreachable: f64,
}

impl AttributionScore {
    pub fn get(&self, kind: DeadType) -> f64 {
        match kind {
            DeadType::Unused => self.a_unused,
            DeadType::Unreachable => self.a_unreachable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub unused_lines: Vec<usize>,
    pub unreachable_lines: Vec<usize>,
    pub tau: f64,
    pub epsilon: f64,
}

impl CandidateSet {
    pub fn empty(tau: f64, epsilon: f64) -> Self {
        CandidateSet {
            unused_lines: Vec::new(),
            unreachable_lines: Vec::new(),
            tau,
            epsilon,
        }
    }

    pub fn lines(&self, kind: DeadType) -> &[usize] {
        match kind {
            DeadType::Unused => &self.unused_lines,
            DeadType::Unreachable => &self.unreachable_lines,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.unused_lines.is_empty() && self.unreachable_lines.is_empty()
    }

    /// Classes that selected line `index`.
    pub fn classes_of(&self, index: usize) -> Vec<DeadType> {
        DeadType::ALL
            .into_iter()
            .filter(|k| self.lines(*k).contains(&index))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttributionConfig {
    pub mask_token: String,
    /// Snippets longer than this are scored on a window centred on each
    /// perturbed line.
    pub window: usize,
}

impl Default for AttributionConfig {
    fn default() -> Self {
        AttributionConfig {
            mask_token: DEFAULT_MASK_TOKEN.to_string(),
            window: DEFAULT_WINDOW,
        }
    }
}

pub fn is_eligible(kind: LineKind) -> bool {
    matches!(kind, LineKind::Statement | LineKind::Condition)
}

/// `C_{-i}`: deletes statement line `i`, or masks the guard of condition
/// line `i`.
pub fn perturb(snippet: &CodeSnippet, index: usize, mask_token: &str) -> Result<CodeSnippet, AttributionError> {
    let line = snippet.line(index).ok_or(CodeModelError::IndexOutOfRange {
        index,
        len: snippet.len(),
    })?;
    match line.kind {
        LineKind::Condition => Ok(mask_condition(snippet, index, mask_token)?),
        LineKind::Statement => Ok(delete_line(snippet, index)?),
        LineKind::Structural | LineKind::BlankOrComment => Err(AttributionError::IneligibleLine(index)),
    }
}

/// Lines that will actually be perturbed. An unmaskable condition or the
/// lone line of a one-line snippet is skipped rather than failing the run.
fn perturbable(snippet: &CodeSnippet, mask_token: &str) -> Vec<(usize, CodeSnippet)> {
    snippet
        .lines()
        .iter()
        .filter(|l| is_eligible(l.kind))
        .filter_map(|l| match perturb(snippet, l.index, mask_token) {
            Ok(p) => Some((l.index, p)),
            Err(e) => {
                debug!("skipping line {}: {e}", l.index);
                None
            }
        })
        .collect()
}

fn score(index: usize, base: &ClassProbabilities, pert: &ClassProbabilities) -> AttributionScore {
    let drop = |b: f64, p: f64| (b - p).clamp(0.0, 1.0);
    AttributionScore {
        index,
        a_unused: drop(base.p_unused, pert.p_unused),
        a_unreachable: drop(base.p_unreachable, pert.p_unreachable),
    }
}

fn classify_all<C: Classifier + ?Sized>(
    classifier: &C,
    items: &[CodeSnippet],
    labels: &[Option<usize>],
) -> Result<Vec<ClassProbabilities>, AttributionError> {
    if classifier.prefers_batch() {
        return classifier
            .classify_batch(items)
            .map_err(|source| AttributionError::Classifier {
                lines: labels.iter().flatten().copied().collect(),
                source,
            });
    }
    items
        .par_iter()
        .zip(labels.par_iter())
        .map(|(s, label)| {
            classifier.classify(s).map_err(|source| AttributionError::Classifier {
                lines: label.iter().copied().collect(),
                source,
            })
        })
        .collect()
}

/// Per-line attribution `a_i = max(f(C) - f(C_{-i}), 0)` restricted to the
/// unused and unreachable components. Ineligible lines score `(0, 0)`.
pub fn attribute<C: Classifier + ?Sized>(
    snippet: &CodeSnippet,
    classifier: &C,
    config: &AttributionConfig,
) -> Result<Vec<AttributionScore>, AttributionError> {
    if config.window == 0 {
        return Err(AttributionError::InvalidWindow);
    }
    let mut scores: Vec<AttributionScore> = (1..=snippet.len())
        .map(|index| AttributionScore {
            index,
            a_unused: 0.0,
            a_unreachable: 0.0,
        })
        .collect();
    if snippet.len() <= config.window {
        let perturbed = perturbable(snippet, &config.mask_token);
        let mut items = Vec::with_capacity(perturbed.len() + 1);
        let mut labels = Vec::with_capacity(perturbed.len() + 1);
        items.push(snippet.clone());
        labels.push(None);
        for (i, p) in perturbed {
            items.push(p);
            labels.push(Some(i));
        }
        let probs = classify_all(classifier, &items, &labels)?;
        let base = probs[0];
        for (label, p) in labels.iter().zip(&probs).skip(1) {
            let i = label.expect("perturbed item");
            scores[i - 1] = score(i, &base, p);
        }
        return Ok(scores);
    }
    attribute_windowed(snippet, classifier, config, scores)
}

/// Window `[start, end]` (1-based, inclusive) of `size` lines centred on `i`.
pub fn window_around(len: usize, i: usize, size: usize) -> (usize, usize) {
    let size = size.min(len);
    let start = i.saturating_sub(size / 2).max(1).min(len + 1 - size);
    (start, start + size - 1)
}

/// A window snippet and its perturbations keyed by original line index.
type Window = (CodeSnippet, Vec<(usize, CodeSnippet)>);

fn attribute_windowed<C: Classifier + ?Sized>(
    snippet: &CodeSnippet,
    classifier: &C,
    config: &AttributionConfig,
    mut scores: Vec<AttributionScore>,
) -> Result<Vec<AttributionScore>, AttributionError> {
    let texts = snippet.texts();
    // one base classification per distinct window
    let mut windows: BTreeMap<(usize, usize), Window> = BTreeMap::new();
    for line in snippet.lines().iter().filter(|l| is_eligible(l.kind)) {
        let (s, e) = window_around(snippet.len(), line.index, config.window);
        let entry = match windows.entry((s, e)) {
            std::collections::btree_map::Entry::Occupied(o) => o.into_mut(),
            std::collections::btree_map::Entry::Vacant(v) => {
                let w = CodeSnippet::from_lines(snippet.language(), &texts[s - 1..e])?;
                v.insert((w, Vec::new()))
            }
        };
        match perturb(&entry.0, line.index - s + 1, &config.mask_token) {
            Ok(p) => entry.1.push((line.index, p)),
            Err(e) => debug!("skipping line {}: {e}", line.index),
        }
    }
    for (window, perturbed) in windows.into_values() {
        let mut items = vec![window];
        let mut labels = vec![None];
        for (i, p) in perturbed {
            items.push(p);
            labels.push(Some(i));
        }
        let probs = classify_all(classifier, &items, &labels)?;
        for (label, p) in labels.iter().zip(&probs).skip(1) {
            let i = label.expect("perturbed item");
            scores[i - 1] = score(i, &probs[0], p);
        }
    }
    Ok(scores)
}

fn select_class(scores: &[AttributionScore], kind: DeadType, tau: f64, epsilon: f64) -> Vec<usize> {
    let max = scores.iter().map(|s| s.get(kind)).fold(0.0f64, f64::max);
    if max <= epsilon {
        return Vec::new();
    }
    let threshold = max / tau;
    let mut kept: Vec<&AttributionScore> = scores.iter().filter(|s| s.get(kind) >= threshold).collect();
    kept.sort_by(|a, b| b.get(kind).total_cmp(&a.get(kind)).then(a.index.cmp(&b.index)));
    kept.into_iter().map(|s| s.index).collect()
}

/// Keeps, per class, lines scoring at least `max / tau`; nothing when the
/// class maximum does not exceed `epsilon`.
pub fn select_candidates(
    scores: &[AttributionScore],
    tau: f64,
    epsilon: f64,
) -> Result<CandidateSet, AttributionError> {
    if tau.is_nan() || tau < 1.0 {
        return Err(AttributionError::InvalidTau(tau));
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(AttributionError::InvalidEpsilon(epsilon));
    }
    Ok(CandidateSet {
        unused_lines: select_class(scores, DeadType::Unused, tau, epsilon),
        unreachable_lines: select_class(scores, DeadType::Unreachable, tau, epsilon),
        tau,
        epsilon,
    })
}
