//! The pivot-classifier contract `f(C) -> [0,1]^3` and its implementations.

mod fixture;
mod heuristic;
mod remote;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::CodeSnippet;
use crate::labels::Class;

pub use fixture::FixtureClassifier;
pub use heuristic::HeuristicClassifier;
pub use remote::{RemoteClassifier, WireItem, WireProbs, WireResult};

/// Tolerance on the probability-sum invariant.
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("classifier endpoint unavailable after {attempts} attempts: {last}")]
    RemoteUnavailable { attempts: usize, last: String },
    #[error("malformed classifier response: {0}")]
    RemoteMalformed(String),
    #[error("invalid classifier config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassProbabilities {
    pub p_normal: f64,
    pub p_unused: f64,
    pub p_unreachable: f64,
}

impl ClassProbabilities {
    /// Projects nonnegative masses onto the simplex. All-zero mass maps to
    /// certainty in `normal`.
    pub fn normalized(normal: f64, unused: f64, unreachable: f64) -> Self {
        let (n, u, r) = (normal.max(0.0), unused.max(0.0), unreachable.max(0.0));
        let sum = n + u + r;
        if !(sum > 0.0 && sum.is_finite()) {
            return ClassProbabilities {
                p_normal: 1.0,
                p_unused: 0.0,
                p_unreachable: 0.0,
            };
        }
        ClassProbabilities {
            p_normal: n / sum,
            p_unused: u / sum,
            p_unreachable: r / sum,
        }
    }

    /// Validates an externally supplied vector without rescaling it.
    pub fn checked(normal: f64, unused: f64, unreachable: f64) -> Result<Self, String> {
        let p = ClassProbabilities {
            p_normal: normal,
            p_unused: unused,
            p_unreachable: unreachable,
        };
        if p.as_array().iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
            return Err(format!("probability outside [0,1]: {p:?}"));
        }
        let sum: f64 = p.as_array().iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(format!("probabilities sum to {sum}"));
        }
        Ok(p)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p_normal, self.p_unused, self.p_unreachable]
    }

    pub fn get(&self, class: Class) -> f64 {
        self.as_array()[class.position()]
    }

    pub fn is_simplex(&self) -> bool {
        Self::checked(self.p_normal, self.p_unused, self.p_unreachable).is_ok()
    }

    /// Argmax with ties going to unreachable, then unused, then normal.
    pub fn argmax(&self) -> Class {
        let mut best = Class::Unreachable;
        for c in [Class::Unused, Class::Normal] {
            if self.get(c) > self.get(best) {
                best = c;
            }
        }
        best
    }

    /// Pivot decision. With `normal_floor` set, `normal` is only predicted
    /// when its probability reaches the floor; otherwise the likelier dead
    /// class wins.
    pub fn decide(&self, normal_floor: Option<f64>) -> Class {
        let top = self.argmax();
        match normal_floor {
            Some(floor) if top == Class::Normal && self.p_normal < floor => {
                if self.p_unused > self.p_unreachable {
                    Class::Unused
                } else {
                    Class::Unreachable
                }
            }
            _ => top,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Heuristic,
    Fixture,
    Remote,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Heuristic => "heuristic",
            ClassifierKind::Fixture => "fixture",
            ClassifierKind::Remote => "remote",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "heuristic" => Ok(ClassifierKind::Heuristic),
            "fixture" => Ok(ClassifierKind::Fixture),
            "remote" => Ok(ClassifierKind::Remote),
            other => Err(ClassifierError::Config(format!("unknown classifier kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
    pub max_retries: usize,
    pub batch_size: usize,
    /// First retry delay; doubles per attempt.
    pub backoff_ms: u64,
    pub normal_floor: Option<f64>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            kind: ClassifierKind::Heuristic,
            endpoint: None,
            timeout_ms: 30_000,
            max_retries: 3,
            batch_size: 32,
            backoff_ms: 200,
            normal_floor: None,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.batch_size == 0 {
            return Err(ClassifierError::Config("batch_size must be at least 1".into()));
        }
        if self.kind == ClassifierKind::Remote && self.endpoint.as_deref().is_none_or(str::is_empty) {
            return Err(ClassifierError::Config("remote classifier needs an endpoint".into()));
        }
        if let Some(f) = self.normal_floor {
            if !(0.0..=1.0).contains(&f) {
                return Err(ClassifierError::Config(format!("normal_floor {f} outside [0,1]")));
            }
        }
        Ok(())
    }
}

/// Classifier contract. Implementations must be callable from many
/// workers at once.
pub trait Classifier: Send + Sync {
    fn kind(&self) -> ClassifierKind;

    fn classify(&self, snippet: &CodeSnippet) -> Result<ClassProbabilities, ClassifierError>;

    /// Order-preserving batch; the default classifies one by one.
    fn classify_batch(&self, snippets: &[CodeSnippet]) -> Result<Vec<ClassProbabilities>, ClassifierError> {
        snippets.iter().map(|s| self.classify(s)).collect()
    }

    /// True when one batch call is cheaper than many single calls.
    fn prefers_batch(&self) -> bool {
        false
    }
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn kind(&self) -> ClassifierKind {
        (**self).kind()
    }

    fn classify(&self, snippet: &CodeSnippet) -> Result<ClassProbabilities, ClassifierError> {
        (**self).classify(snippet)
    }

    fn classify_batch(&self, snippets: &[CodeSnippet]) -> Result<Vec<ClassProbabilities>, ClassifierError> {
        (**self).classify_batch(snippets)
    }

    fn prefers_batch(&self) -> bool {
        (**self).prefers_batch()
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn kind(&self) -> ClassifierKind {
        (**self).kind()
    }

    fn classify(&self, snippet: &CodeSnippet) -> Result<ClassProbabilities, ClassifierError> {
        (**self).classify(snippet)
    }

    fn classify_batch(&self, snippets: &[CodeSnippet]) -> Result<Vec<ClassProbabilities>, ClassifierError> {
        (**self).classify_batch(snippets)
    }

    fn prefers_batch(&self) -> bool {
        (**self).prefers_batch()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_lands_on_simplex() {
        let p = ClassProbabilities::normalized(0.9, 0.475, 0.05);
        assert!(p.is_simplex());
        assert!((p.p_normal - 0.9 / 1.425).abs() < 1e-12);
        assert_eq!(ClassProbabilities::normalized(0.0, 0.0, 0.0).argmax(), Class::Normal);
    }

    #[test]
    fn checked_rejects_bad_sums() {
        assert!(ClassProbabilities::checked(0.1, 0.7, 0.2).is_ok());
        assert!(ClassProbabilities::checked(0.1, 0.5, 0.2).is_err());
        assert!(ClassProbabilities::checked(-0.1, 0.9, 0.2).is_err());
        assert!(ClassProbabilities::checked(f64::NAN, 0.5, 0.5).is_err());
    }

    #[test]
    fn argmax_tie_precedence() {
        let p = ClassProbabilities::normalized(1.0, 1.0, 1.0);
        assert_eq!(p.argmax(), Class::Unreachable);
        let p = ClassProbabilities::normalized(1.0, 1.0, 0.0);
        assert_eq!(p.argmax(), Class::Unused);
        let p = ClassProbabilities::normalized(0.0, 0.5, 0.5);
        assert_eq!(p.argmax(), Class::Unreachable);
    }

    #[test]
    fn normal_floor_favors_dead_classes() {
        let p = ClassProbabilities::normalized(0.5, 0.3, 0.2);
        assert_eq!(p.decide(None), Class::Normal);
        assert_eq!(p.decide(Some(0.6)), Class::Unused);
        assert_eq!(p.decide(Some(0.5)), Class::Normal);
    }

    #[test]
    fn config_validation() {
        let mut c = ClassifierConfig::default();
        assert!(c.validate().is_ok());
        c.kind = ClassifierKind::Remote;
        assert!(c.validate().is_err());
        c.endpoint = Some("http://127.0.0.1:1".into());
        assert!(c.validate().is_ok());
        c.batch_size = 0;
        assert!(c.validate().is_err());
    }
}
