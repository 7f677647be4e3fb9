use std::collections::HashMap;

use super::{ClassProbabilities, Classifier, ClassifierError, ClassifierKind};
use crate::code_model::CodeSnippet;

/// Gold-aware test double keyed on line text, so it survives the index
/// shifts caused by deleting lines.
#[derive(Debug, Clone, Default)]
pub struct FixtureClassifier {
    unused: HashMap<String, usize>,
    unreachable: HashMap<String, usize>,
    n_unused: usize,
    n_unreachable: usize,
}

fn key(text: &str) -> String {
    text.trim().to_string()
}

fn multiset<S: AsRef<str>>(texts: &[S]) -> HashMap<String, usize> {
    let mut m = HashMap::new();
    for t in texts {
        *m.entry(key(t.as_ref())).or_insert(0) += 1;
    }
    m
}

impl FixtureClassifier {
    pub fn new<S: AsRef<str>>(unused: &[S], unreachable: &[S]) -> Self {
        FixtureClassifier {
            unused: multiset(unused),
            unreachable: multiset(unreachable),
            n_unused: unused.len(),
            n_unreachable: unreachable.len(),
        }
    }

    /// Gold texts taken from `snippet` at the given 1-based indices.
    pub fn from_indices(snippet: &CodeSnippet, unused: &[usize], unreachable: &[usize]) -> Self {
        let texts = |idx: &[usize]| -> Vec<String> {
            idx.iter()
                .filter_map(|&i| snippet.line(i).map(|l| l.text.clone()))
                .collect()
        };
        Self::new(&texts(unused), &texts(unreachable))
    }

    fn present(gold: &HashMap<String, usize>, lines: &HashMap<String, usize>) -> usize {
        gold.iter()
            .map(|(text, &want)| want.min(lines.get(text).copied().unwrap_or(0)))
            .sum()
    }

    /// Pre-normalization masses (normal, unused, unreachable).
    pub fn raw(&self, snippet: &CodeSnippet) -> (f64, f64, f64) {
        let lines = multiset(&snippet.texts());
        let frac = |gold, n: usize| Self::present(gold, &lines) as f64 / n.max(1) as f64;
        let u = 0.05 + 0.8 * frac(&self.unused, self.n_unused);
        let r = 0.05 + 0.8 * frac(&self.unreachable, self.n_unreachable);
        ((1.0 - u - r).max(0.0), u, r)
    }
}

impl Classifier for FixtureClassifier {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Fixture
    }

    fn classify(&self, snippet: &CodeSnippet) -> Result<ClassProbabilities, ClassifierError> {
        let (n, u, r) = self.raw(snippet);
        Ok(ClassProbabilities::normalized(n, u, r))
    }
}
