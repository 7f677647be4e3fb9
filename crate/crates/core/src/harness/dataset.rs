use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::code_model::{render, split_lines, CodeModelError, CodeSnippet, Language};
use crate::forge::{self, injected_unused, insert, instantiate, split_patterns, ForgeError, InsertionRecord};
use crate::labels::{Class, GoldLine, SnippetLabel};
use crate::oracle::{annotate, GoldAnnotation, LineFinding, Reason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            _ => Err(HarnessError::Config(format!("unknown split `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub language: Language,
    pub code: String,
    pub label: SnippetLabel,
    pub dead_lines: Vec<GoldLine>,
    pub pattern_id: Option<String>,
    pub split: Split,
}

impl DatasetRecord {
    /// Record for a file with no known gold; the oracle's findings stand in.
    pub fn from_source(id: impl Into<String>, snippet: &CodeSnippet) -> Self {
        let gold = annotate(snippet, None);
        DatasetRecord {
            id: id.into(),
            language: snippet.language(),
            code: render(snippet),
            label: gold.label,
            dead_lines: gold
                .lines
                .iter()
                .map(|f| GoldLine {
                    index: f.index,
                    kind: f.kind,
                })
                .collect(),
            pattern_id: None,
            split: Split::Test,
        }
    }

    pub fn snippet(&self) -> Result<CodeSnippet, CodeModelError> {
        Ok(split_lines(&self.code, self.language)?.with_origin(self.id.clone()))
    }

    pub fn class(&self) -> Class {
        self.label.to_class()
    }

    pub fn gold(&self) -> GoldAnnotation {
        GoldAnnotation::from_lines(
            self.dead_lines
                .iter()
                .map(|g| LineFinding {
                    index: g.index,
                    kind: g.kind,
                    reason: Reason::InsertedPattern,
                })
                .collect(),
        )
    }

    fn from_insertion(id: String, rec: &InsertionRecord, pattern_id: Option<String>, split: Split) -> Self {
        let gold = annotate(&rec.mutated, Some(rec));
        DatasetRecord {
            id,
            language: rec.mutated.language(),
            code: render(&rec.mutated),
            label: gold.label,
            dead_lines: gold
                .lines
                .iter()
                .map(|f| GoldLine {
                    index: f.index,
                    kind: f.kind,
                })
                .collect(),
            pattern_id,
            split,
        }
    }
}

/// Class mix as `normal:unused:unreachable` weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratios {
    pub normal: u32,
    pub unused: u32,
    pub unreachable: u32,
}

impl Default for Ratios {
    fn default() -> Self {
        Ratios {
            normal: 4,
            unused: 1,
            unreachable: 1,
        }
    }
}

impl Ratios {
    fn weights(&self) -> [u32; 3] {
        [self.normal, self.unused, self.unreachable]
    }
}

impl fmt::Display for Ratios {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.normal, self.unused, self.unreachable)
    }
}

impl FromStr for Ratios {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || HarnessError::Config(format!("ratios must look like 4:1:1, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<u32> = parts
            .iter()
            .map(|p| p.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        Ok(Ratios {
            normal: nums[0],
            unused: nums[1],
            unreachable: nums[2],
        })
    }
}

/// Pattern ids available to train/dev records and to test records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSplit {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl PatternSplit {
    pub fn from_catalog(seed: u64, train_fraction: f64) -> Self {
        let (train, test) = split_patterns(seed, train_fraction);
        PatternSplit { train, test }
    }

    fn for_split(&self, split: Split) -> &[String] {
        match split {
            Split::Test => &self.test,
            Split::Train | Split::Dev => &self.train,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthOptions {
    pub ratios: Ratios,
    pub seed: u64,
    /// Records drawn from each dead-role host, each from a different block.
    pub variants: usize,
    /// Host fractions for (train, dev, test).
    pub split_fractions: (f64, f64, f64),
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            ratios: Ratios::default(),
            seed: 7,
            variants: 1,
            split_fractions: (0.8, 0.1, 0.1),
        }
    }
}

/// Deterministic sub-seed for one (host, role, variant) draw.
fn derive_seed(seed: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Largest-remainder apportionment of `n` items over `weights`.
fn apportion(n: usize, weights: [u32; 3]) -> [usize; 3] {
    let total: u64 = weights.iter().map(|&w| u64::from(w)).sum();
    let mut out = [0usize; 3];
    if total == 0 {
        return out;
    }
    let mut rems = Vec::with_capacity(3);
    for (k, &w) in weights.iter().enumerate() {
        let exact = n as u64 * u64::from(w);
        out[k] = (exact / total) as usize;
        rems.push((exact % total, k));
    }
    let left = n - out.iter().sum::<usize>();
    // largest remainder first; ties go to the earlier class
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, k) in rems.iter().take(left) {
        out[k] += 1;
    }
    out
}

fn split_sizes(n: usize, fractions: (f64, f64, f64)) -> [usize; 3] {
    let dev = (n as f64 * fractions.1).round() as usize;
    let test = (n as f64 * fractions.2).round() as usize;
    let dev = dev.min(n);
    let test = test.min(n - dev);
    [n - dev - test, dev, test]
}

struct Host {
    id: String,
    snippet: CodeSnippet,
    natural: GoldAnnotation,
}

fn host_id(snippet: &CodeSnippet, k: usize, seen: &mut HashSet<String>) -> String {
    let base = snippet
        .origin_id()
        .map(|o| o.rsplit_once('.').map_or(o, |(stem, _)| stem).to_string())
        .unwrap_or_else(|| format!("host{k:04}"));
    let mut id = base.clone();
    let mut n = 1;
    while !seen.insert(id.clone()) {
        n += 1;
        id = format!("{base}_{n}");
    }
    id
}

fn forge_err(host: &str, source: ForgeError) -> HarnessError {
    HarnessError::Forge {
        host: host.to_string(),
        source,
    }
}

fn unused_record(host: &Host, v: usize, split: Split, seed: u64) -> Result<DatasetRecord, HarnessError> {
    let lang = host.snippet.language();
    let mut last = ForgeError::NoInsertionPoint;
    for attempt in 0..8 {
        let s = derive_seed(seed, &[&host.id, "unused", &v.to_string(), &attempt.to_string()]);
        let block = injected_unused(lang, s);
        match insert(&host.snippet, &block, s) {
            Ok(rec) => {
                return Ok(DatasetRecord::from_insertion(
                    format!("{}/unused.{v}", host.id),
                    &rec,
                    None,
                    split,
                ))
            }
            Err(e) => last = e,
        }
    }
    Err(forge_err(&host.id, last))
}

fn unreachable_record(
    host: &Host,
    v: usize,
    split: Split,
    seed: u64,
    patterns: &[String],
) -> Result<DatasetRecord, HarnessError> {
    let lang = host.snippet.language();
    let mut order: Vec<&String> = patterns.iter().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(
        seed,
        &[&host.id, "patterns"],
    )));
    let mut last = ForgeError::NoInsertionPoint;
    for k in 0..order.len() {
        let pid = order[(v + k) % order.len()];
        let s = derive_seed(seed, &[&host.id, "unreachable", &v.to_string(), pid]);
        let rec = instantiate(pid, lang, s).and_then(|block| insert(&host.snippet, &block, s));
        match rec {
            Ok(rec) => {
                return Ok(DatasetRecord::from_insertion(
                    format!("{}/unreachable.{v}", host.id),
                    &rec,
                    Some(pid.clone()),
                    split,
                ))
            }
            Err(e) => last = e,
        }
    }
    Err(forge_err(&host.id, last))
}

/// Builds a labeled dataset from clean hosts.
///
/// Hosts are split into train/dev/test first, then each split's clean hosts
/// are apportioned to normal, unused and unreachable roles by `ratios`.
/// Hosts the oracle already flags keep their natural label. Each mutated
/// train host also contributes its clean original as a normal record.
pub fn synth_dataset(
    corpus: &[CodeSnippet],
    options: &SynthOptions,
    patterns: &PatternSplit,
) -> Result<Vec<DatasetRecord>, HarnessError> {
    if corpus.is_empty() {
        return Err(HarnessError::InsufficientCorpus("corpus is empty".into()));
    }
    let weights = options.ratios.weights();
    if weights.iter().all(|&w| w == 0) {
        return Err(HarnessError::Config("ratios are all zero".into()));
    }
    if options.variants == 0 {
        return Err(HarnessError::Config("variants must be at least 1".into()));
    }
    check_split(patterns)?;
    if weights[2] > 0 && (patterns.train.is_empty() || patterns.test.is_empty()) {
        return Err(HarnessError::InsufficientCorpus(
            "unreachable records need pattern ids on both sides of the split".into(),
        ));
    }

    let mut seen = HashSet::new();
    let mut hosts: Vec<Host> = corpus
        .iter()
        .enumerate()
        .map(|(k, s)| Host {
            id: host_id(s, k, &mut seen),
            snippet: s.clone(),
            natural: annotate(s, None),
        })
        .collect();
    hosts.sort_by(|a, b| a.id.cmp(&b.id));
    hosts.shuffle(&mut ChaCha8Rng::seed_from_u64(options.seed));

    let sizes = split_sizes(hosts.len(), options.split_fractions);
    let mut records = Vec::new();
    let mut offset = 0;
    for (split, size) in Split::ALL.into_iter().zip(sizes) {
        let group = &hosts[offset..offset + size];
        offset += size;
        let (clean, dirty): (Vec<&Host>, Vec<&Host>) = group.iter().partition(|h| h.natural.lines.is_empty());
        for h in dirty {
            records.push(DatasetRecord {
                split,
                ..DatasetRecord::from_source(format!("{}/natural", h.id), &h.snippet)
            });
        }
        let counts = apportion(clean.len(), weights);
        for (k, class) in Class::ALL.iter().enumerate() {
            if weights[k] > 0 && counts[k] == 0 {
                return Err(HarnessError::InsufficientCorpus(format!(
                    "{split} split has {} clean hosts, too few for a {} record at ratios {}",
                    clean.len(),
                    class,
                    options.ratios
                )));
            }
        }
        let (normal, rest) = clean.split_at(counts[0]);
        let (unused, unreachable) = rest.split_at(counts[1]);
        for h in normal {
            records.push(DatasetRecord {
                split,
                ..DatasetRecord::from_source(format!("{}/normal", h.id), &h.snippet)
            });
        }
        for h in unused {
            for v in 0..options.variants {
                records.push(unused_record(h, v, split, options.seed)?);
            }
        }
        for h in unreachable {
            let ids: Vec<String> = patterns
                .for_split(split)
                .iter()
                .filter(|p| forge::pattern(p).is_some_and(|spec| spec.languages.contains(&h.snippet.language())))
                .cloned()
                .collect();
            if ids.is_empty() {
                return Err(HarnessError::InsufficientCorpus(format!(
                    "no {split} pattern supports {}",
                    h.snippet.language()
                )));
            }
            for v in 0..options.variants {
                records.push(unreachable_record(h, v, split, options.seed, &ids)?);
            }
        }
        if split == Split::Train {
            for h in unused.iter().chain(unreachable) {
                records.push(DatasetRecord {
                    split,
                    ..DatasetRecord::from_source(format!("{}/hard_negative", h.id), &h.snippet)
                });
            }
        }
    }
    records.sort_by(|a, b| a.split.cmp(&b.split).then_with(|| a.id.cmp(&b.id)));
    check_leakage(&records, Some(patterns))?;
    Ok(records)
}

fn check_split(patterns: &PatternSplit) -> Result<(), HarnessError> {
    let test: HashSet<&String> = patterns.test.iter().collect();
    let shared: BTreeSet<&String> = patterns.train.iter().filter(|p| test.contains(p)).collect();
    if let Some(p) = shared.into_iter().next() {
        return Err(HarnessError::PatternLeakage(format!(
            "pattern `{p}` is in both train and test"
        )));
    }
    Ok(())
}

/// Fails if a pattern id reaches both sides of the split: either the split
/// itself overlaps, a test record uses a non-test pattern, or (with no split
/// given) the same pattern appears in test and in train/dev records.
pub fn check_leakage(records: &[DatasetRecord], patterns: Option<&PatternSplit>) -> Result<(), HarnessError> {
    if let Some(p) = patterns {
        check_split(p)?;
        let test: HashSet<&str> = p.test.iter().map(String::as_str).collect();
        for r in records {
            let Some(pid) = r.pattern_id.as_deref() else {
                continue;
            };
            let in_test = test.contains(pid);
            if (r.split == Split::Test) != in_test {
                return Err(HarnessError::PatternLeakage(format!(
                    "{} record `{}` uses pattern `{pid}` from the {} side",
                    r.split,
                    r.id,
                    if in_test { "test" } else { "train" }
                )));
            }
        }
        return Ok(());
    }
    let seen_in = |pred: fn(Split) -> bool| -> BTreeSet<&str> {
        records
            .iter()
            .filter(|r| pred(r.split))
            .filter_map(|r| r.pattern_id.as_deref())
            .collect()
    };
    let test = seen_in(|s| s == Split::Test);
    let other = seen_in(|s| s != Split::Test);
    if let Some(p) = test.intersection(&other).next() {
        return Err(HarnessError::PatternLeakage(format!(
            "pattern `{p}` occurs in test and in train/dev records"
        )));
    }
    Ok(())
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), HarnessError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|e| HarnessError::Format(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<DatasetRecord>, HarnessError> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (k, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DatasetRecord = serde_json::from_str(&line)
            .map_err(|e| HarnessError::Format(format!("{}:{}: {e}", path.display(), k + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// Source files under `dir` with a known extension, sorted by path.
pub fn load_corpus(dir: &Path) -> Result<Vec<CodeSnippet>, HarnessError> {
    let mut paths = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p
                .extension()
                .and_then(|e| e.to_str())
                .and_then(Language::from_extension)
                .is_some()
            {
                paths.push(p);
            }
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let lang = p
                .extension()
                .and_then(|e| e.to_str())
                .and_then(Language::from_extension)
                .expect("filtered above");
            let text = std::fs::read_to_string(&p)?;
            let name = p.strip_prefix(dir).unwrap_or(&p).to_string_lossy().replace('\\', "/");
            Ok(split_lines(&text, lang)?.with_origin(name))
        })
        .collect()
}
