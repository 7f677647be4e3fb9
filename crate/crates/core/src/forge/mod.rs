//! Adversarial unreachable-code patterns: a parametric catalog, seeded
//! instantiation, legal-boundary insertion into host snippets, a constant
//! folding proof that each guard is false, and a family-stratified
//! train/test split of pattern ids.

mod catalog;
pub mod diffexec;
mod insert;
mod prove;
mod split;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::{CodeModelError, CodeSnippet, Language};
use crate::labels::{DeadType, GoldLine};

pub use insert::{insert, insert_at, legal_insertion_points};
pub use prove::prove_guard_false;
pub use split::{split_ids, split_patterns};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    AfterReturn,
    CoveredBranch,
    FloorCompare,
    AfterAssert,
    SortedArray,
    ModularArith,
    SquaredNonneg,
    StringLength,
    TypeContradiction,
    Tautology,
    MinMax,
    AbsNonneg,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::AfterReturn => "after_return",
            Family::CoveredBranch => "covered_branch",
            Family::FloorCompare => "floor_compare",
            Family::AfterAssert => "after_assert",
            Family::SortedArray => "sorted_array",
            Family::ModularArith => "modular_arith",
            Family::SquaredNonneg => "squared_nonneg",
            Family::StringLength => "string_length",
            Family::TypeContradiction => "type_contradiction",
            Family::Tautology => "tautology",
            Family::MinMax => "min_max",
            Family::AbsNonneg => "abs_nonneg",
        }
    }

    /// Families a literal-only checker is expected to catch.
    pub fn naive_detectable(self) -> bool {
        matches!(self, Family::AfterReturn | Family::Tautology)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternSpec {
    pub id: &'static str,
    pub family: Family,
    pub languages: Vec<Language>,
    /// Number of fresh identifiers the pattern draws (excluding the body).
    pub arity: usize,
    pub description: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockRole {
    /// Fresh-variable setup; gold type unused.
    Preamble,
    /// The always-false condition; gold type unreachable.
    Guard,
    /// Inert statements under the guard; gold type unreachable.
    Body,
    /// Executed glue (braces, `pass`, loop headers, asserts); not gold.
    Scaffold,
}

impl BlockRole {
    pub fn gold_type(self) -> Option<DeadType> {
        match self {
            BlockRole::Preamble => Some(DeadType::Unused),
            BlockRole::Guard | BlockRole::Body => Some(DeadType::Unreachable),
            BlockRole::Scaffold => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLine {
    pub role: BlockRole,
    /// Nesting depth relative to the insertion point.
    pub depth: usize,
    /// Text without indentation.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeadBlock {
    pub pattern_id: String,
    pub language: Language,
    pub lines: Vec<BlockLine>,
    /// Identifiers the block introduces; none may occur in a host.
    pub fresh_names: Vec<String>,
    /// Library names the block relies on; a host must not rebind them.
    pub library_names: Vec<String>,
}

impl DeadBlock {
    fn texts_with(&self, role: BlockRole) -> Vec<&str> {
        self.lines
            .iter()
            .filter(|l| l.role == role)
            .map(|l| l.text.as_str())
            .collect()
    }

    pub fn preamble_lines(&self) -> Vec<&str> {
        self.texts_with(BlockRole::Preamble)
    }

    pub fn guard_line(&self) -> Option<&str> {
        self.texts_with(BlockRole::Guard).into_iter().next()
    }

    pub fn body_lines(&self) -> Vec<&str> {
        self.texts_with(BlockRole::Body)
    }

    /// Renders the block with `base` indentation and `unit` per depth level.
    pub fn render_lines(&self, base: &str, unit: &str) -> Vec<String> {
        self.lines
            .iter()
            .map(|l| format!("{base}{}{}", unit.repeat(l.depth), l.text))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertionRecord {
    pub mutated: CodeSnippet,
    /// Inclusive 1-based span of the inserted lines.
    pub inserted_span: (usize, usize),
    pub gold_lines: Vec<GoldLine>,
    pub pattern_id: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForgeError {
    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),
    #[error("pattern `{pattern}` does not support {language}")]
    UnsupportedLanguage { pattern: String, language: Language },
    #[error("no legal insertion point in host")]
    NoInsertionPoint,
    #[error("insertion point {0} is not legal")]
    IllegalInsertionPoint(usize),
    #[error("block language {block} does not match host language {host}")]
    LanguageMismatch { block: Language, host: Language },
    #[error("identifier `{0}` from the block already occurs in the host")]
    NameCollision(String),
    #[error(transparent)]
    Model(#[from] CodeModelError),
}

/// The built-in patterns, ordered by id.
pub fn catalog() -> Vec<PatternSpec> {
    let mut specs: Vec<PatternSpec> = catalog::ENTRIES
        .iter()
        .map(|e| PatternSpec {
            id: e.id,
            family: e.family,
            languages: Language::ALL.to_vec(),
            arity: e.arity,
            description: e.description,
        })
        .collect();
    specs.sort_by_key(|s| s.id);
    specs
}

pub fn pattern(id: &str) -> Option<PatternSpec> {
    catalog().into_iter().find(|p| p.id == id)
}

fn seed_rng(pattern_id: &str, language: Language, seed: u64) -> ChaCha8Rng {
    use sha2::{Digest, Sha256};
    let digest = Sha256::new()
        .chain_update(pattern_id.as_bytes())
        .chain_update([0u8])
        .chain_update(language.as_str().as_bytes())
        .chain_update(seed.to_le_bytes())
        .finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Draws a concrete dead block for `pattern_id`; deterministic in all inputs.
pub fn instantiate(pattern_id: &str, language: Language, seed: u64) -> Result<DeadBlock, ForgeError> {
    let entry = catalog::ENTRIES
        .iter()
        .find(|e| e.id == pattern_id)
        .ok_or_else(|| ForgeError::UnknownPattern(pattern_id.to_string()))?;
    let spec = pattern(pattern_id).ok_or_else(|| ForgeError::UnknownPattern(pattern_id.to_string()))?;
    if !spec.languages.contains(&language) {
        return Err(ForgeError::UnsupportedLanguage {
            pattern: pattern_id.to_string(),
            language,
        });
    }
    let mut draw = catalog::Draw::new(seed_rng(pattern_id, language, seed));
    let shape = (entry.build)(language, &mut draw);
    let body = catalog::body(language, &mut draw, shape.body_depth);
    let mut lines = shape.head;
    lines.extend(body);
    lines.extend(shape.tail);
    Ok(DeadBlock {
        pattern_id: pattern_id.to_string(),
        language,
        lines,
        fresh_names: draw.names,
        library_names: draw.libraries.into_iter().map(String::from).collect(),
    })
}

/// Pseudo pattern id of [`injected_unused`] blocks. Not part of the catalog.
pub const INJECTED_UNUSED_ID: &str = "injected_unused";

/// One or two fresh assignments that are never read, for unused records
/// when the host has no natural unused code.
pub fn injected_unused(language: Language, seed: u64) -> DeadBlock {
    use rand::Rng;
    let mut draw = catalog::Draw::new(seed_rng(INJECTED_UNUSED_ID, language, seed));
    let count = draw.rng.gen_range(1..=2);
    let lines = (0..count)
        .map(|_| {
            let name = draw.fresh();
            let value = draw.int(0, 99);
            let text = match (language, draw.int(0, 1)) {
                (Language::Python, 0) => format!("{name} = {value}"),
                (Language::Python, _) => format!("{name} = [{value}]"),
                (Language::Java, 0) => format!("int {name} = {value};"),
                (Language::Java, _) => format!("long {name} = {value}L;"),
            };
            BlockLine {
                role: BlockRole::Preamble,
                depth: 0,
                text,
            }
        })
        .collect();
    DeadBlock {
        pattern_id: INJECTED_UNUSED_ID.to_string(),
        language,
        lines,
        fresh_names: draw.names,
        library_names: Vec::new(),
    }
}

/// One entry of the `forge.json` catalog dump.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub family: Family,
    pub languages: Vec<Language>,
    pub description: &'static str,
    pub example: String,
}

/// Catalog with a rendered Python example per pattern.
pub fn catalog_dump() -> Vec<CatalogEntry> {
    catalog()
        .into_iter()
        .map(|p| {
            let example = instantiate(p.id, Language::Python, 0)
                .map(|b| b.render_lines("", "    ").join("\n"))
                .unwrap_or_default();
            CatalogEntry {
                id: p.id,
                family: p.family,
                languages: p.languages,
                description: p.description,
                example,
            }
        })
        .collect()
}
