use super::{ClassProbabilities, Classifier, ClassifierError, ClassifierKind};
use crate::code_model::CodeSnippet;
use crate::labels::DeadType;
use crate::oracle::findings;

/// Oracle-backed stand-in for a trained pivot.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicClassifier;

impl HeuristicClassifier {
    /// Class mass from a finding count: 0.05 + 0.85 * min(1, k/2).
    pub fn mass(k: usize) -> f64 {
        0.05 + 0.85 * (k as f64 / 2.0).min(1.0)
    }

    pub fn from_counts(unused: usize, unreachable: usize) -> ClassProbabilities {
        ClassProbabilities::normalized(0.90, Self::mass(unused), Self::mass(unreachable))
    }
}

impl Classifier for HeuristicClassifier {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Heuristic
    }

    fn classify(&self, snippet: &CodeSnippet) -> Result<ClassProbabilities, ClassifierError> {
        let found = findings(snippet);
        let count = |t: DeadType| found.iter().filter(|f| f.kind == t).count();
        Ok(Self::from_counts(count(DeadType::Unused), count(DeadType::Unreachable)))
    }
}
