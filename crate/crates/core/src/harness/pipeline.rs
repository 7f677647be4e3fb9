use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::dataset::DatasetRecord;
use super::HarnessError;
use crate::attribution::{
    attribute, select_candidates, AttributionConfig, AttributionError, AttributionScore, CandidateSet, DEFAULT_EPSILON,
    DEFAULT_TAU,
};
use crate::audit::{audit, AuditReport, DEFAULT_MIN_CONFINEMENT};
use crate::classifier::{
    ClassProbabilities, Classifier, ClassifierConfig, ClassifierKind, FixtureClassifier, HeuristicClassifier,
    RemoteClassifier,
};
use crate::code_model::CodeSnippet;
use crate::labels::{Class, DeadType, SnippetLabel};
use crate::llm::{
    build_base_prompt, build_hinted_prompt, explain, ChatParams, Finding, LlmVerdict, Transport, TEMPLATE_VERSION,
};
use crate::oracle::annotate;

/// Which stages run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Pivot filter, attribution, hinted prompt, audit.
    Full,
    /// Every record goes to attribution and the LLM.
    NoPivot,
    /// Stops after attribution; findings are the typed candidates.
    NoLlm,
    /// Base prompt without suspect lines.
    NoAttribution,
    /// The static oracle alone, as an IDE-style baseline.
    Oracle,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Full,
        Mode::NoPivot,
        Mode::NoLlm,
        Mode::NoAttribution,
        Mode::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::NoPivot => "no_pivot",
            Mode::NoLlm => "no_llm",
            Mode::NoAttribution => "no_attribution",
            Mode::Oracle => "oracle",
        }
    }

    pub fn uses_llm(self) -> bool {
        matches!(self, Mode::Full | Mode::NoPivot | Mode::NoAttribution)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s.to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| HarnessError::Config(format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub classifier: ClassifierConfig,
    pub tau: f64,
    pub epsilon: f64,
    pub mode: Mode,
    pub attribution: AttributionConfig,
    /// Minimum diff confinement for an acceptable fix.
    pub min_confinement: f64,
    pub chat: ChatParams,
    /// Record per-stage wall time. Off for byte-stable output.
    pub timings: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            classifier: ClassifierConfig::default(),
            tau: DEFAULT_TAU,
            epsilon: DEFAULT_EPSILON,
            mode: Mode::Full,
            attribution: AttributionConfig::default(),
            min_confinement: DEFAULT_MIN_CONFINEMENT,
            chat: ChatParams::default(),
            timings: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.classifier
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.tau.is_nan() || self.tau < 1.0 {
            return Err(HarnessError::Config(format!("tau must be >= 1, got {}", self.tau)));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(HarnessError::Config(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if self.attribution.window == 0 {
            return Err(HarnessError::Config("attribution window must be positive".into()));
        }
        Ok(())
    }

    /// Hex sha256 over the settings that change what a report says.
    pub fn fingerprint(&self) -> String {
        let v = json!({
            "classifier": self.classifier.kind.as_str(),
            "normal_floor": self.classifier.normal_floor,
            "tau": self.tau,
            "epsilon": self.epsilon,
            "template_version": TEMPLATE_VERSION,
            "mode": self.mode.as_str(),
        });
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }
}

/// Wall time per stage in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub classify_ms: f64,
    pub attribute_ms: f64,
    pub llm_ms: f64,
    pub audit_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub record_id: String,
    pub mode: Mode,
    pub predicted_label: Class,
    pub pivot: Option<ClassProbabilities>,
    pub candidates: Option<CandidateSet>,
    pub findings: Vec<Finding>,
    pub verdict: Option<LlmVerdict>,
    pub llm_calls: usize,
    pub audit: Option<AuditReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
    /// Stage failures for this record; the run carries on.
    pub errors: Vec<String>,
    pub template_version: String,
    pub config_fingerprint: String,
}

impl AnalysisReport {
    pub fn failed(&self) -> bool {
        !self.errors.is_empty()
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

fn candidate_findings(c: &CandidateSet) -> Vec<Finding> {
    let mut out: Vec<Finding> = DeadType::ALL
        .into_iter()
        .flat_map(|kind| {
            c.lines(kind).iter().map(move |&line| Finding {
                line,
                kind,
                explanation: None,
            })
        })
        .collect();
    out.sort_by_key(|f| (f.line, f.kind));
    out
}

fn verdict_class(v: &LlmVerdict) -> Option<Class> {
    if !v.has_dead_code {
        return Some(Class::Normal);
    }
    let has = |t: DeadType| v.findings.iter().any(|f| f.kind == t);
    match SnippetLabel::from_types(has(DeadType::Unused), has(DeadType::Unreachable)) {
        SnippetLabel::Normal => None,
        label => Some(label.to_class()),
    }
}

/// Classifier and transport shared by all records of a run.
pub struct Pipeline {
    config: PipelineConfig,
    remote: Option<RemoteClassifier>,
    transport: Option<Box<dyn Transport>>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, transport: Option<Box<dyn Transport>>) -> Result<Self, HarnessError> {
        config.validate()?;
        let remote = match config.classifier.kind {
            ClassifierKind::Remote => {
                Some(RemoteClassifier::new(&config.classifier).map_err(|e| HarnessError::Config(e.to_string()))?)
            }
            _ => None,
        };
        Ok(Pipeline {
            config,
            remote,
            transport,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    fn classifier_for(&self, record: &DatasetRecord, snippet: &CodeSnippet) -> Box<dyn Classifier + '_> {
        match self.config.classifier.kind {
            ClassifierKind::Heuristic => Box::new(HeuristicClassifier),
            ClassifierKind::Fixture => {
                let lines = |t: DeadType| -> Vec<usize> {
                    record
                        .dead_lines
                        .iter()
                        .filter(|d| d.kind == t)
                        .map(|d| d.index)
                        .collect()
                };
                Box::new(FixtureClassifier::from_indices(
                    snippet,
                    &lines(DeadType::Unused),
                    &lines(DeadType::Unreachable),
                ))
            }
            ClassifierKind::Remote => Box::new(self.remote.as_ref().expect("remote classifier built in new")),
        }
    }

    /// Runs one record. Stage failures end up in `errors`, never as `Err`.
    pub fn run(&self, record: &DatasetRecord) -> AnalysisReport {
        let cfg = &self.config;
        let mut report = AnalysisReport {
            record_id: record.id.clone(),
            mode: cfg.mode,
            predicted_label: Class::Normal,
            pivot: None,
            candidates: None,
            findings: Vec::new(),
            verdict: None,
            llm_calls: 0,
            audit: None,
            timings: None,
            errors: Vec::new(),
            template_version: TEMPLATE_VERSION.to_string(),
            config_fingerprint: cfg.fingerprint(),
        };
        let mut timings = Timings::default();
        self.run_stages(record, &mut report, &mut timings);
        if cfg.timings {
            report.timings = Some(timings);
        }
        report
    }

    fn run_stages(&self, record: &DatasetRecord, report: &mut AnalysisReport, timings: &mut Timings) {
        let cfg = &self.config;
        let snippet = match record.snippet() {
            Ok(s) => s,
            Err(e) => {
                report.errors.push(format!("parse: {e}"));
                return;
            }
        };

        if cfg.mode == Mode::Oracle {
            let t = Instant::now();
            let gold = annotate(&snippet, None);
            report.predicted_label = gold.label.to_class();
            let candidates = CandidateSet {
                unused_lines: gold.lines_of(DeadType::Unused),
                unreachable_lines: gold.lines_of(DeadType::Unreachable),
                tau: cfg.tau,
                epsilon: cfg.epsilon,
            };
            report.findings = candidate_findings(&candidates);
            report.candidates = Some(candidates);
            timings.classify_ms = ms(t);
            return;
        }

        let classifier = self.classifier_for(record, &snippet);
        let t = Instant::now();
        let probs = match classifier.classify(&snippet) {
            Ok(p) => p,
            Err(e) => {
                report.errors.push(format!("classify: {e}"));
                return;
            }
        };
        timings.classify_ms = ms(t);
        report.pivot = Some(probs);
        let pivot_class = probs.decide(cfg.classifier.normal_floor);
        report.predicted_label = pivot_class;
        if pivot_class == Class::Normal && cfg.mode != Mode::NoPivot {
            debug!("{}: filtered as normal", record.id);
            return;
        }

        if cfg.mode != Mode::NoAttribution {
            let t = Instant::now();
            let selected = attribute(&snippet, classifier.as_ref(), &cfg.attribution)
                .and_then(|scores| select_candidates(&scores, cfg.tau, cfg.epsilon));
            timings.attribute_ms = ms(t);
            match selected {
                Ok(c) => report.candidates = Some(c),
                Err(e) => {
                    report.errors.push(format!("attribute: {e}"));
                    return;
                }
            }
        }

        if cfg.mode == Mode::NoLlm {
            report.findings = report.candidates.as_ref().map(candidate_findings).unwrap_or_default();
            return;
        }

        let Some(transport) = self.transport.as_deref() else {
            report.errors.push("llm: no transport configured".into());
            return;
        };
        let messages = match &report.candidates {
            Some(c) => build_hinted_prompt(&snippet, c),
            None => build_base_prompt(&snippet),
        };
        let t = Instant::now();
        let exchange = explain(transport, &messages, &cfg.chat);
        timings.llm_ms = ms(t);
        let exchange = match exchange {
            Ok(x) => x,
            Err(e) => {
                warn!("{}: {e}", record.id);
                report.errors.push(format!("llm: {e}"));
                return;
            }
        };
        report.llm_calls = exchange.calls;
        let verdict = exchange.verdict.within_bounds(snippet.len());
        if let Some(c) = verdict_class(&verdict) {
            report.predicted_label = c;
        }
        report.findings = verdict.findings.clone();

        if let Some(fixed) = verdict.fixed_code.as_deref() {
            let t = Instant::now();
            report.audit = Some(audit(&snippet, Some(&record.gold()), fixed));
            timings.audit_ms = ms(t);
        }
        report.verdict = Some(verdict);
    }

    /// Per-line scores and the selected candidates for one record.
    pub fn attribution(&self, record: &DatasetRecord) -> Result<(Vec<AttributionScore>, CandidateSet), HarnessError> {
        let snippet = record.snippet()?;
        let classifier = self.classifier_for(record, &snippet);
        let stage = |e: AttributionError| HarnessError::Stage(format!("attribute: {e}"));
        let scores = attribute(&snippet, classifier.as_ref(), &self.config.attribution).map_err(stage)?;
        let candidates = select_candidates(&scores, self.config.tau, self.config.epsilon).map_err(stage)?;
        Ok((scores, candidates))
    }

    /// Runs every record on `workers` threads; output sorted by record id.
    pub fn run_all(&self, records: &[DatasetRecord], workers: usize) -> Result<Vec<AnalysisReport>, HarnessError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let mut reports: Vec<AnalysisReport> = pool.install(|| records.par_iter().map(|r| self.run(r)).collect());
        reports.sort_by(|a, b| a.record_id.cmp(&b.record_id));
        Ok(reports)
    }
}
