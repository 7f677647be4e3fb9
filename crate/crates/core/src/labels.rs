//! Label vocabulary shared by the forge, the oracle, classifiers and the
//! harness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The two dead-code types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadType {
    Unused,
    Unreachable,
}

impl DeadType {
    pub const ALL: [DeadType; 2] = [DeadType::Unused, DeadType::Unreachable];

    pub fn as_str(self) -> &'static str {
        match self {
            DeadType::Unused => "unused",
            DeadType::Unreachable => "unreachable",
        }
    }
}

impl fmt::Display for DeadType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Snippet-level label as stored in datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnippetLabel {
    Normal,
    Unused,
    Unreachable,
    Both,
}

impl SnippetLabel {
    /// Label implied by the set of dead-line types present.
    pub fn from_types(has_unused: bool, has_unreachable: bool) -> Self {
        match (has_unused, has_unreachable) {
            (false, false) => SnippetLabel::Normal,
            (true, false) => SnippetLabel::Unused,
            (false, true) => SnippetLabel::Unreachable,
            (true, true) => SnippetLabel::Both,
        }
    }

    /// Collapses `both` onto `unreachable` for 3-class evaluation.
    pub fn to_class(self) -> Class {
        match self {
            SnippetLabel::Normal => Class::Normal,
            SnippetLabel::Unused => Class::Unused,
            SnippetLabel::Unreachable | SnippetLabel::Both => Class::Unreachable,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SnippetLabel::Normal => "normal",
            SnippetLabel::Unused => "unused",
            SnippetLabel::Unreachable => "unreachable",
            SnippetLabel::Both => "both",
        }
    }
}

impl fmt::Display for SnippetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The three classifier classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Normal,
    Unused,
    Unreachable,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Normal, Class::Unused, Class::Unreachable];

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Normal => "normal",
            Class::Unused => "unused",
            Class::Unreachable => "unreachable",
        }
    }

    pub fn position(self) -> usize {
        match self {
            Class::Normal => 0,
            Class::Unused => 1,
            Class::Unreachable => 2,
        }
    }

    pub fn dead_type(self) -> Option<DeadType> {
        match self {
            Class::Normal => None,
            Class::Unused => Some(DeadType::Unused),
            Class::Unreachable => Some(DeadType::Unreachable),
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for SnippetLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(SnippetLabel::Normal),
            "unused" => Ok(SnippetLabel::Unused),
            "unreachable" => Ok(SnippetLabel::Unreachable),
            "both" => Ok(SnippetLabel::Both),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

impl FromStr for DeadType {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unused" => Ok(DeadType::Unused),
            "unreachable" => Ok(DeadType::Unreachable),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

/// A gold dead line: 1-based index plus type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GoldLine {
    pub index: usize,
    #[serde(rename = "type")]
    pub kind: DeadType,
}
